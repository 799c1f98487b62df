// Copyright 2026 The tree_motion Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tree_motion/rollout.h"

#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "tree_motion/fixtures.h"
#include "tree_motion/maps.h"
#include "tree_motion/policies.h"
#include "tree_motion/spec_io.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {
namespace {

const Eigen::VectorXd kNoTheta;

// Phi = 0.5 q^2 with unit metric: qdot = -q.
TransformTree DecayTree() {
  return TransformTree({{0, 1, ""}, {1, 1, ""}},
                       {{0, 1, std::make_shared<IdentityMap>(1), ""}},
                       {{1, MakeAttractor(Eigen::VectorXd::Zero(1), 1.0, 1.0), ""}});
}

TEST(IntegrateTest, LinearDecayMatchesExponential) {
  RolloutOptions options;
  options.dt = 0.01;
  options.max_steps = 100;
  options.grad_tol = 0.0;
  const RolloutResult r =
      Integrate(DecayTree(), kNoTheta, Eigen::VectorXd::Constant(1, 1.5), options);
  ASSERT_EQ(r.trajectory.size(), 101u);
  EXPECT_EQ(r.status, RolloutStatus::kMaxSteps);
  EXPECT_NEAR(r.trajectory.back().q[0], 1.5 * std::exp(-1.0), 1e-6);
  EXPECT_NEAR(r.trajectory.back().t, 1.0, 1e-12);
  EXPECT_EQ(LyapunovCheck(r, options.dt).violations, 0);
}

TEST(IntegrateTest, EquilibriumConvergesImmediately) {
  const RolloutResult r =
      Integrate(DecayTree(), kNoTheta, Eigen::VectorXd::Zero(1));
  EXPECT_EQ(r.status, RolloutStatus::kConverged);
  EXPECT_EQ(r.steps, 0);
  EXPECT_EQ(r.trajectory.size(), 1u);
}

TEST(IntegrateTest, EquilibriumStaysPut) {
  RolloutOptions options;
  options.max_steps = 50;
  options.grad_tol = -1.0;
  const Eigen::Vector3d goal(0.3, -0.2, 0.9);
  const TransformTree tree({{0, 3, ""}, {1, 3, ""}},
                           {{0, 1, std::make_shared<IdentityMap>(3), ""}},
                           {{1, MakeAttractor(goal, 2.0, 1.5), ""}});
  const RolloutResult r = Integrate(tree, kNoTheta, goal, options);
  for (const Sample& s : r.trajectory) {
    EXPECT_LT((s.q - goal).lpNorm<Eigen::Infinity>(), 1e-9);
  }
  ASSERT_FALSE(r.potential_trace.empty());
  EXPECT_EQ(r.potential_trace.front(), r.potential_trace.back());
}

TEST(IntegrateTest, ReachingFixtureConvergesMonotonically) {
  const LoadedTree loaded = LoadTree(ReachingTreeSpec(), {});
  for (int seed = 0; seed < 3; ++seed) {
    const RolloutResult r = Integrate(loaded.tree, loaded.params.values(),
                                      ReachingInitialState(seed));
    EXPECT_EQ(r.status, RolloutStatus::kConverged) << r.message;
    EXPECT_LE(r.terminal_grad_norm, 1e-6);
    EXPECT_LE(r.max_descent_rate, 1e-10);
    const LyapunovReport report = LyapunovCheck(r, 1e-3);
    EXPECT_TRUE(report.passed);
    EXPECT_LE(report.max_violation, report.slack);
  }
}

TEST(IntegrateTest, BarrierKeepsArmOffObstacle) {
  const LoadedTree loaded = LoadTree(ReachingTreeSpec(), {});
  const Eigen::Vector2d center(2.2, 0.3);
  const PlanarArmFk fk({1, 1, 1});
  for (int seed = 0; seed < 3; ++seed) {
    const RolloutResult r = Integrate(loaded.tree, loaded.params.values(),
                                      ReachingInitialState(seed));
    double closest = 1e300;
    for (const Sample& s : r.trajectory) {
      closest = std::min(closest, (fk.Value(s.q, kNoTheta) - center).norm());
    }
    EXPECT_GT(closest, 0.0);
  }
}

TEST(IntegrateTest, StartingOnObstacleIsAnError) {
  const TransformTree tree(
      {{0, 2, ""}, {1, 1, ""}, {2, 2, ""}},
      {{0, 1, std::make_shared<DistanceToPoint>(Eigen::Vector2d(1, 1)), ""},
       {0, 2, std::make_shared<IdentityMap>(2), ""}},
      {{1, MakeBarrier(0.5, 1.0, 1.0), ""}, {2, MakeDamper(2, 1.0), ""}});
  const RolloutResult r = Integrate(tree, kNoTheta, Eigen::Vector2d(1, 1));
  EXPECT_EQ(r.status, RolloutStatus::kError);
  EXPECT_FALSE(r.message.empty());
}

TEST(LyapunovCheckTest, FlagsIncreases) {
  RolloutResult r;
  r.potential_trace = {3.0, 2.0, 2.5, 1.0};
  const LyapunovReport report = LyapunovCheck(r, 1e-3);
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.violations, 1);
  EXPECT_DOUBLE_EQ(report.max_violation, 0.5);
}

TEST(LyapunovCheckTest, ConstantTraceHasNoViolations) {
  RolloutResult r;
  r.potential_trace = std::vector<double>(10, 1.25);
  const LyapunovReport report = LyapunovCheck(r, 1e-3);
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.max_violation, 0.0);
}

}  // namespace
}  // namespace tree_motion
