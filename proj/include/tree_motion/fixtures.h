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

#ifndef TREE_MOTION_FIXTURES_H_
#define TREE_MOTION_FIXTURES_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tree_motion/demos.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {

// Planar 3-link arm reaching a goal around a disc obstacle: end-effector
// attractor, obstacle barrier, joint damper.
nlohmann::json ReachingTreeSpec();

// Seeded initial configuration a safe distance away from the obstacle.
Eigen::VectorXd ReachingInitialState(std::uint64_t seed);

// Planar 3-link arm with a learnable end-effector leaf (diffeomorphism plus
// Cholesky metric) and a joint damper that is stiffer at the base.
nlohmann::json RedundantArmTreeSpec();

inline constexpr int kRedundantArmIterations = 300;

// Training config for the redundant arm: only the end-effector leaf carries
// subtask-loss weight.
nlohmann::json RedundantArmTrainConfig(int iterations, std::uint64_t seed);

struct RedundantDemoOptions {
  int pairs = 2;           // each pair yields two demonstrations
  double duration = 3.0;   // seconds
  double sample_dt = 0.1;
  double null_speed = 2.0;  // joint-space null motion, opposite within a pair
  std::uint64_t seed = 0;
};

// Demonstrations whose end effector follows one convergent field while the
// joints resolve the redundancy in opposite directions within each pair:
// consistent in task space, conflicting in joint space.
DemoSet RedundantArmDemos(const RedundantDemoOptions& options = {});

// Root mean square of J_node (qdot - pi(q)) over all samples.
double NodeVelocityRmsError(const TransformTree& tree,
                            const Eigen::VectorXd& theta, const DemoSet& demos,
                            int node);

}  // namespace tree_motion

#endif  // TREE_MOTION_FIXTURES_H_
