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

#include "tree_motion/fixtures.h"

#include <cmath>
#include <random>

#include "tree_motion/maps.h"

namespace tree_motion {
namespace {

using nlohmann::json;

const std::vector<double> kLinks = {1.0, 1.0, 1.0};
const Eigen::Vector2d kReachGoal(1.2, 1.4);
const Eigen::Vector2d kObstacle(2.2, 0.3);
constexpr double kObstacleMargin = 0.4;

const Eigen::Vector2d kTaskGoal(0.8, 1.6);
const Eigen::Vector2d kTaskGains(1.0, 2.5);

Eigen::Vector2d TaskField(const Eigen::Vector2d& x) {
  return -kTaskGains.cwiseProduct(x - kTaskGoal);
}

}  // namespace

json ReachingTreeSpec() {
  return json::parse(R"({
    "nodes": [
      {"id": 0, "dim": 3, "name": "joints"},
      {"id": 1, "dim": 2, "name": "end_effector"},
      {"id": 2, "dim": 2, "name": "reach"},
      {"id": 3, "dim": 1, "name": "obstacle_distance"},
      {"id": 4, "dim": 3, "name": "joint_damping"}
    ],
    "edges": [
      {"parent": 0, "child": 1, "name": "fk",
       "map": {"kind": "planar_arm_fk", "lengths": [1, 1, 1], "point": "ee"}},
      {"parent": 1, "child": 2, "map": {"kind": "identity"}},
      {"parent": 1, "child": 3, "name": "obstacle",
       "map": {"kind": "distance_to_point", "center": [2.2, 0.3]}},
      {"parent": 0, "child": 4, "map": {"kind": "identity"}}
    ],
    "leaves": [
      {"node": 2, "name": "attractor",
       "policy": {"kind": "attractor", "goal": [1.2, 1.4], "gain": 2.0,
                  "weight": 1.0}},
      {"node": 3, "name": "barrier",
       "policy": {"kind": "barrier", "margin": 0.4, "gain": 1.0,
                  "weight": 1.0}},
      {"node": 4, "name": "damper",
       "policy": {"kind": "damper", "gain": 0.1}}
    ]
  })");
}

Eigen::VectorXd ReachingInitialState(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-M_PI / 2, M_PI / 2);
  const PlanarArmFk fk(kLinks);
  const Eigen::VectorXd none;
  while (true) {
    Eigen::VectorXd q(3);
    for (int i = 0; i < 3; ++i) q[i] = angle(rng);
    const double dist = (fk.Value(q, none) - kObstacle).norm();
    if (dist > 0.5 * kObstacleMargin) return q;
  }
}

json RedundantArmTreeSpec() {
  return json::parse(R"({
    "nodes": [
      {"id": 0, "dim": 3, "name": "joints"},
      {"id": 1, "dim": 2, "name": "end_effector"},
      {"id": 2, "dim": 2, "name": "end_effector_latent"},
      {"id": 3, "dim": 3, "name": "joint_damping"}
    ],
    "edges": [
      {"parent": 0, "child": 1, "name": "fk",
       "map": {"kind": "planar_arm_fk", "lengths": [1, 1, 1], "point": "ee"}},
      {"parent": 1, "child": 2, "name": "ee_diffeo",
       "map": {"kind": "diffeo_chain", "layers": 4, "features_D": 32,
               "length_scale": "auto", "seed": 11}},
      {"parent": 0, "child": 3, "map": {"kind": "identity"}}
    ],
    "leaves": [
      {"node": 2, "name": "ee_policy",
       "policy": {"kind": "natural_gradient", "learnable": true,
                  "potential": {"kind": "latent_quadratic",
                                "goal": [0.8, 1.6]},
                  "metric": {"kind": "cholesky_net", "hidden": [16, 16],
                             "seed": 21}}},
      {"node": 3, "name": "damper",
       "policy": {"kind": "damper", "gain": [1.0, 0.02, 0.02]}}
    ]
  })");
}

json RedundantArmTrainConfig(int iterations, std::uint64_t seed) {
  json config;
  config["loss"] = {{"kind", "subtask"}, {"lambda", {1.0, 0.0}}};
  config["alpha"] = 5e-5;
  config["iterations"] = iterations;
  config["seed"] = seed;
  return config;
}

DemoSet RedundantArmDemos(const RedundantDemoOptions& options) {
  const PlanarArmFk fk(kLinks);
  const Eigen::VectorXd none;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  constexpr int kSubsteps = 20;

  DemoSet demos;
  for (int pair = 0; pair < options.pairs; ++pair) {
    Eigen::VectorXd start(3);
    start << -0.6 + jitter(rng), 1.2 + jitter(rng), 0.9 + jitter(rng);
    for (double sign : {1.0, -1.0}) {
      auto velocity = [&](const Eigen::VectorXd& q) {
        const Eigen::MatrixXd jac = fk.Jacobian(q, none);
        const Eigen::Vector2d xdot = TaskField(fk.Value(q, none));
        const Eigen::MatrixXd pinv =
            jac.transpose() * (jac * jac.transpose()).inverse();
        // Unit null-space direction of the 2x3 Jacobian.
        const Eigen::Vector3d r0 = jac.row(0).transpose();
        const Eigen::Vector3d r1 = jac.row(1).transpose();
        const Eigen::Vector3d null = r0.cross(r1).normalized();
        return Eigen::VectorXd(pinv * xdot +
                               sign * options.null_speed * null);
      };
      Trajectory traj;
      Eigen::VectorXd q = start;
      const int samples =
          static_cast<int>(std::lround(options.duration / options.sample_dt));
      const double h = options.sample_dt / kSubsteps;
      for (int i = 0; i <= samples; ++i) {
        traj.push_back({i * options.sample_dt, q, velocity(q)});
        if (i == samples) break;
        for (int s = 0; s < kSubsteps; ++s) {
          const Eigen::VectorXd k1 = velocity(q);
          const Eigen::VectorXd k2 = velocity(q + 0.5 * h * k1);
          const Eigen::VectorXd k3 = velocity(q + 0.5 * h * k2);
          const Eigen::VectorXd k4 = velocity(q + h * k3);
          q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
      }
      demos.trajectories.push_back(std::move(traj));
    }
  }
  return demos;
}

double NodeVelocityRmsError(const TransformTree& tree,
                            const Eigen::VectorXd& theta, const DemoSet& demos,
                            int node) {
  double total = 0.0;
  int count = 0;
  for (const Sample* s : demos.Flatten()) {
    TreeStates states = ForwardPass(tree, s->q, theta);
    LeafEvaluate(tree, states, theta);
    BackwardPass(tree, states);
    const Eigen::VectorXd pi = Resolve(states);
    const Eigen::MatrixXd jac = NodeJacobians(tree, states)[node];
    total += (jac * (s->qdot - pi)).squaredNorm();
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(total / count);
}

}  // namespace tree_motion
