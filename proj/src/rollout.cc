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

#include <algorithm>
#include <cmath>
#include <limits>

#include "tree_motion/errors.h"

namespace tree_motion {
namespace {

struct PointEval {
  Eigen::VectorXd velocity;
  Eigen::VectorXd force;
  std::optional<double> potential;
};

PointEval EvaluateAt(const TransformTree& tree, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& theta, double regularization,
                     bool with_potential) {
  TreeStates states = ForwardPass(tree, q, theta);
  LeafEvaluate(tree, states, theta);
  PointEval out;
  if (with_potential) out.potential = RootPotential(tree, states, theta);
  BackwardPass(tree, states);
  out.velocity = Resolve(states, regularization);
  if (!out.velocity.allFinite()) {
    throw NumericError("policy velocity is not finite");
  }
  out.force = std::move(states[0].pulled_force);
  return out;
}

}  // namespace

std::string RolloutStatusName(RolloutStatus status) {
  switch (status) {
    case RolloutStatus::kConverged:
      return "converged";
    case RolloutStatus::kMaxSteps:
      return "max_steps";
    case RolloutStatus::kError:
      return "error";
  }
  return "unknown";
}

RolloutResult Integrate(const TransformTree& tree, const Eigen::VectorXd& theta,
                        const Eigen::VectorXd& q0,
                        const RolloutOptions& options) {
  if (q0.size() != tree.root_dim()) {
    throw StructuralError("initial configuration has dimension " +
                          std::to_string(q0.size()) + ", tree root has " +
                          std::to_string(tree.root_dim()));
  }
  if (!(options.dt > 0.0) || options.max_steps < 0) {
    throw StructuralError("rollout needs dt > 0 and max_steps >= 0");
  }
  const double dt = options.dt;
  const double reg = options.regularization;
  RolloutResult result;
  result.max_descent_rate = -std::numeric_limits<double>::infinity();
  bool with_potential = true;

  Eigen::VectorXd q = q0;
  double t = 0.0;
  try {
    for (int step = 0;; ++step) {
      PointEval here = EvaluateAt(tree, q, theta, reg, with_potential);
      if (with_potential && !here.potential) {
        with_potential = false;
        result.potential_trace.clear();
      }
      result.trajectory.push_back({t, q, here.velocity});
      if (with_potential) result.potential_trace.push_back(*here.potential);
      // grad(Phi_r) = -p_r.
      result.max_descent_rate =
          std::max(result.max_descent_rate, -here.force.dot(here.velocity));
      result.terminal_grad_norm = here.force.norm();
      result.steps = step;
      if (result.terminal_grad_norm <= options.grad_tol) {
        result.status = RolloutStatus::kConverged;
        break;
      }
      if (step == options.max_steps) {
        result.status = RolloutStatus::kMaxSteps;
        break;
      }
      const Eigen::VectorXd& k1 = here.velocity;
      const Eigen::VectorXd k2 =
          EvaluateAt(tree, q + 0.5 * dt * k1, theta, reg, false).velocity;
      const Eigen::VectorXd k3 =
          EvaluateAt(tree, q + 0.5 * dt * k2, theta, reg, false).velocity;
      const Eigen::VectorXd k4 =
          EvaluateAt(tree, q + dt * k3, theta, reg, false).velocity;
      q += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = (step + 1) * dt;
    }
  } catch (const std::exception& e) {
    result.status = RolloutStatus::kError;
    result.message = e.what();
  }
  if (result.trajectory.empty()) {
    result.max_descent_rate = 0.0;
  }
  return result;
}

LyapunovReport LyapunovCheck(const RolloutResult& result, double dt, double c) {
  LyapunovReport report;
  report.slack = c * dt * dt;
  const std::vector<double>& phi = result.potential_trace;
  for (size_t i = 1; i < phi.size(); ++i) {
    const double rise = phi[i] - phi[i - 1];
    report.max_violation = std::max(report.max_violation, rise);
    if (rise > report.slack) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

}  // namespace tree_motion
