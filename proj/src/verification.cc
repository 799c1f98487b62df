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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tree_motion/errors.h"
#include "tree_motion/flat_solver.h"
#include "tree_motion/gradients.h"

namespace tree_motion {
namespace {

using nlohmann::json;

std::vector<double> ToStd(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

Eigen::MatrixXd FiniteDifferenceJacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const Eigen::VectorXd col = (f(xp) - f(xm)) / (2.0 * h);
    if (i == 0) jac.resize(col.size(), x.size());
    jac.col(i) = col;
    xp[i] = xm[i] = x[i];
  }
  return jac;
}

double FiniteDifferencePartial(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, int i, double h) {
  Eigen::VectorXd xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

double MaxRelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        double floor) {
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    const double scale = std::max({std::abs(x), std::abs(y), floor});
    worst = std::max(worst, std::abs(x - y) / scale);
  }
  return worst;
}

VerificationReport CheckTree(const TransformTree& tree,
                             const Eigen::VectorXd& theta,
                             const CheckOptions& options) {
  VerificationReport report;
  json& out = report.json;
  out["nodes"] = tree.num_nodes();
  out["leaves"] = tree.num_leaves();
  json points = json::array();
  json failures = json::array();
  double worst_flat = 0.0, worst_jac = 0.0;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-options.radius, options.radius);
  const int d = tree.root_dim();

  for (int p = 0; p < options.points; ++p) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(d);
    if (p > 0) {
      for (int i = 0; i < d; ++i) q[i] = unif(rng);
    }
    json entry = {{"q", ToStd(q)}};
    try {
      const Eigen::VectorXd pi = EvaluatePolicy(tree, q, theta);
      const Eigen::VectorXd flat = FlatSolve(tree, q, theta);
      const double diff = (pi - flat).lpNorm<Eigen::Infinity>();
      worst_flat = std::max(worst_flat, diff);
      entry["pi"] = ToStd(pi);
      entry["flat_diff"] = diff;
      if (!(diff <= options.flat_tolerance)) {
        failures.push_back({{"kind", "tree_flat_mismatch"},
                            {"point", p},
                            {"max_abs_diff", diff}});
        report.exit_code = std::max<int>(report.exit_code, kExitNumeric);
      }
      const TreeStates states = ForwardPass(tree, q, theta);
      for (const TreeEdge& edge : tree.edges()) {
        const Eigen::VectorXd& x = states[edge.parent].coord;
        const DifferentiableMap& map = *edge.map;
        const Eigen::MatrixXd fd = FiniteDifferenceJacobian(
            [&](const Eigen::VectorXd& y) { return map.Value(y, theta); }, x);
        const double err =
            MaxRelativeError(states[edge.child].jac_to_parent, fd, 1.0);
        worst_jac = std::max(worst_jac, err);
        if (!(err < options.jacobian_tolerance)) {
          failures.push_back({{"kind", "jacobian_mismatch"},
                              {"point", p},
                              {"edge", tree.EdgeLabel(edge)},
                              {"relative_error", err}});
          report.exit_code = std::max<int>(report.exit_code, kExitNumeric);
        }
      }
    } catch (const SingularMetricError& e) {
      failures.push_back({{"kind", "singular_root_metric"},
                          {"point", p},
                          {"min_eigenvalue", e.min_eigenvalue()},
                          {"message", e.what()}});
      report.exit_code = kExitNumeric;
    } catch (const DomainError& e) {
      // Outside the domain of some map or policy; not a defect of the tree.
      entry["skipped"] = e.what();
    } catch (const NumericError& e) {
      failures.push_back(
          {{"kind", "numeric"}, {"point", p}, {"message", e.what()}});
      report.exit_code = kExitNumeric;
    }
    points.push_back(std::move(entry));
  }
  out["points"] = std::move(points);
  out["max_tree_flat_diff"] = worst_flat;
  out["max_jacobian_relative_error"] = worst_jac;
  out["failures"] = std::move(failures);
  out["status"] = report.exit_code == kExitOk ? "pass" : "fail";
  return report;
}

VerificationReport GradCheck(const TransformTree& tree,
                             const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& trainable_mask,
                             const DemoSet& demos, const LossSpec& loss,
                             const GradCheckOptions& options) {
  VerificationReport report;
  json& out = report.json;

  std::vector<int> coords;
  for (int i = 0; i < theta.size(); ++i) {
    if (trainable_mask[i] != 0.0) coords.push_back(i);
  }
  out["trainable"] = coords.size();
  if (options.max_coordinates > 0 &&
      static_cast<int>(coords.size()) > options.max_coordinates) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
    std::sort(coords.begin(), coords.end());
  }
  out["checked"] = coords.size();

  LossAndGradient analytic = EvaluateLossAndGradient(tree, theta, demos, loss);
  if (options.corrupt && !coords.empty()) {
    // Flip the largest checked entry (offset so a zero entry changes too)
    // and scale the rest by 1%.
    int top = coords[0];
    for (int i : coords) {
      if (std::abs(analytic.grad[i]) > std::abs(analytic.grad[top])) top = i;
    }
    for (int i : coords) analytic.grad[i] *= 1.01;
    analytic.grad[top] = -analytic.grad[top] + 1.0;
  }
  out["loss"] = analytic.loss;

  const auto objective = [&](const Eigen::VectorXd& t) {
    return EvaluateLoss(tree, t, demos, loss);
  };
  double worst = 0.0;
  int worst_index = -1;
  for (int i : coords) {
    const double fd = FiniteDifferencePartial(objective, theta, i);
    const double a = analytic.grad[i];
    const double scale =
        std::max({std::abs(a), std::abs(fd), options.floor});
    const double err = std::abs(a - fd) / scale;
    if (err > worst || worst_index < 0) {
      worst = std::max(worst, err);
      worst_index = i;
    }
  }
  out["max_relative_error"] = worst;
  if (worst_index >= 0) {
    out["worst_index"] = worst_index;
    out["worst_analytic"] = analytic.grad[worst_index];
  }
  out["tolerance"] = options.tolerance;
  report.exit_code = worst < options.tolerance ? kExitOk : kExitNumeric;
  out["status"] = report.exit_code == kExitOk ? "pass" : "fail";
  return report;
}

}  // namespace tree_motion
