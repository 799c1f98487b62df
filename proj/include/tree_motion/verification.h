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

#ifndef TREE_MOTION_VERIFICATION_H_
#define TREE_MOTION_VERIFICATION_H_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tree_motion/demos.h"
#include "tree_motion/losses.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {

inline constexpr double kJacobianStep = 1e-6;
inline constexpr double kGradientStep = 1e-5;

// Central differences.
Eigen::MatrixXd FiniteDifferenceJacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = kJacobianStep);
double FiniteDifferencePartial(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, int i, double h = kGradientStep);

// |a - b| / max(|a|, |b|, floor), elementwise maximum.
double MaxRelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        double floor);

struct CheckOptions {
  int points = 10;  // the first one is the origin
  std::uint64_t seed = 0;
  double radius = 1.0;
  double flat_tolerance = 1e-10;
  double jacobian_tolerance = 1e-5;
};

// Exit-code convention shared with the command line tool.
enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitValidation = 2,
                kExitNumeric = 3 };

struct VerificationReport {
  int exit_code = kExitOk;
  nlohmann::json json;
};

// Compares the tree algorithm against the flat solver and every edge
// Jacobian against finite differences at seeded configurations.
VerificationReport CheckTree(const TransformTree& tree,
                             const Eigen::VectorXd& theta,
                             const CheckOptions& options = {});

struct GradCheckOptions {
  double tolerance = 1e-4;
  // Gradient magnitudes below this are compared in absolute terms.
  double floor = 1e-3;
  // Upper bound on checked coordinates; 0 checks every trainable entry.
  int max_coordinates = 0;
  std::uint64_t seed = 0;
  // Test hook: perturbs the analytic gradient so the check must fail.
  bool corrupt = false;
};

VerificationReport GradCheck(const TransformTree& tree,
                             const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& trainable_mask,
                             const DemoSet& demos, const LossSpec& loss,
                             const GradCheckOptions& options = {});

}  // namespace tree_motion

#endif  // TREE_MOTION_VERIFICATION_H_
