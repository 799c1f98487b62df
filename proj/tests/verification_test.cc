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

#include "tree_motion/verification.h"

#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "tests/support/random_trees.h"
#include "tree_motion/fixtures.h"
#include "tree_motion/maps.h"
#include "tree_motion/policies.h"
#include "tree_motion/spec_io.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {
namespace {

TEST(FiniteDifferenceTest, JacobianOfKnownFunction) {
  const auto f = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(2);
    y << x[0] * x[1], std::sin(x[0]);
    return y;
  };
  const Eigen::Vector2d x(0.5, 2.0);
  Eigen::Matrix2d expected;
  expected << 2.0, 0.5, std::cos(0.5), 0.0;
  EXPECT_LT(MaxRelativeError(FiniteDifferenceJacobian(f, x), expected, 1.0),
            1e-9);
  EXPECT_NEAR(FiniteDifferencePartial(
                  [](const Eigen::VectorXd& v) { return v.squaredNorm(); }, x, 1),
              4.0, 1e-9);
}

TEST(MaxRelativeErrorTest, UsesFloorForSmallEntries) {
  EXPECT_DOUBLE_EQ(MaxRelativeError(Eigen::Vector2d(1e-6, 10),
                                    Eigen::Vector2d(2e-6, 10), 1e-3),
                   1e-3);
  EXPECT_DOUBLE_EQ(MaxRelativeError(Eigen::Vector2d(1, 10),
                                    Eigen::Vector2d(1, 11), 1e-3),
                   1.0 / 11.0);
}

TEST(CheckTreeTest, ReachingFixturePasses) {
  const LoadedTree loaded = LoadTree(ReachingTreeSpec());
  const VerificationReport report = CheckTree(loaded.tree, loaded.params.values());
  EXPECT_EQ(report.exit_code, kExitOk) << report.json.dump(2);
  EXPECT_EQ(report.json["points"].size(), 10u);
  EXPECT_EQ(report.json["points"][0]["q"], (std::vector<double>{0, 0, 0}));
  EXPECT_LE(report.json["max_tree_flat_diff"].get<double>(), 1e-10);
}

// A 2-link arm with only an end-effector leaf is singular when stretched out,
// which is exactly the origin.
TEST(CheckTreeTest, StretchedArmIsSingularAtOrigin) {
  const TransformTree tree(
      {{0, 2, ""}, {1, 2, ""}},
      {{0, 1, std::make_shared<PlanarArmFk>(std::vector<double>{1, 1}), "fk"}},
      {{1, MakeAttractor(Eigen::Vector2d(1, 1), 1.0, 1.0), ""}});
  const VerificationReport report = CheckTree(tree, Eigen::VectorXd());
  EXPECT_EQ(report.exit_code, kExitNumeric);
  ASSERT_FALSE(report.json["failures"].empty());
  EXPECT_EQ(report.json["failures"][0]["kind"], "singular_root_metric");
  EXPECT_EQ(report.json["failures"][0]["point"], 0);
}

TEST(CheckTreeTest, RandomTreesPass) {
  for (int seed = 0; seed < 10; ++seed) {
    const testing::RandomTree t = testing::MakeRandomTree(900 + seed);
    const VerificationReport report = CheckTree(*t.tree, t.params.values());
    EXPECT_EQ(report.exit_code, kExitOk) << report.json["failures"].dump();
  }
}

class GradCheckTest : public ::testing::Test {
 protected:
  GradCheckTest() : demos_(RedundantArmDemos({.pairs = 1, .duration = 0.4})) {
    LoadOptions options;
    options.demos = &demos_;
    loaded_ = std::make_unique<LoadedTree>(LoadTree(RedundantArmTreeSpec(), options));
  }

  VerificationReport Run(const Eigen::VectorXd& mask, bool corrupt) {
    GradCheckOptions options;
    options.max_coordinates = 60;
    options.corrupt = corrupt;
    return GradCheck(loaded_->tree, loaded_->params.values(), mask, demos_,
                     {LossKind::kSubtaskSpace, {1.0, 0.0}}, options);
  }

  DemoSet demos_;
  std::unique_ptr<LoadedTree> loaded_;
};

TEST_F(GradCheckTest, LearnableFixturePasses) {
  const VerificationReport report = Run(loaded_->params.TrainableMask(), false);
  EXPECT_EQ(report.exit_code, kExitOk) << report.json.dump(2);
  EXPECT_EQ(report.json["checked"], 60);
}

TEST_F(GradCheckTest, FrozenParametersPassTrivially) {
  const VerificationReport report =
      Run(Eigen::VectorXd::Zero(loaded_->params.size()), false);
  EXPECT_EQ(report.exit_code, kExitOk);
  EXPECT_EQ(report.json["checked"], 0);
}

TEST_F(GradCheckTest, CorruptedGradientFails) {
  const VerificationReport report = Run(loaded_->params.TrainableMask(), true);
  EXPECT_EQ(report.exit_code, kExitNumeric);
  EXPECT_GT(report.json["max_relative_error"].get<double>(), 1e-4);
}

}  // namespace
}  // namespace tree_motion
