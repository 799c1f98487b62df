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

#ifndef TREE_MOTION_ROLLOUT_H_
#define TREE_MOTION_ROLLOUT_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tree_motion/demos.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {

struct RolloutOptions {
  double dt = 1e-3;
  int max_steps = 1000000;
  // Convergence threshold on the root force norm, which equals the norm of
  // the root potential gradient when every leaf is a gradient flow.
  double grad_tol = 1e-6;
  double regularization = 0.0;
};

enum class RolloutStatus { kConverged, kMaxSteps, kError };

std::string RolloutStatusName(RolloutStatus status);

struct RolloutResult {
  // Sample i holds q_i and pi(q_i).
  Trajectory trajectory;
  // Root potential per sample; empty if some leaf has no potential.
  std::vector<double> potential_trace;
  double terminal_grad_norm = 0.0;
  RolloutStatus status = RolloutStatus::kMaxSteps;
  int steps = 0;
  // Largest grad(Phi_r)^T pi seen along the rollout; <= 0 in exact
  // arithmetic.
  double max_descent_rate = 0.0;
  std::string message;
};

// Fixed-step RK4 on qdot = pi(q).
RolloutResult Integrate(const TransformTree& tree, const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& q0,
                        const RolloutOptions& options = {});

struct LyapunovReport {
  double slack = 0.0;
  double max_violation = 0.0;  // max over t of Phi_{t+1} - Phi_t
  int violations = 0;          // steps exceeding the slack
  bool passed = true;
};

// Checks Phi_{t+1} <= Phi_t + c * dt^2.
LyapunovReport LyapunovCheck(const RolloutResult& result, double dt,
                             double c = 1.0);

}  // namespace tree_motion

#endif  // TREE_MOTION_ROLLOUT_H_
