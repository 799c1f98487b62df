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

#include "tree_motion/learning.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "tree_motion/errors.h"
#include "tree_motion/gradients.h"

namespace tree_motion {
namespace {

// Loss and masked gradient; a numeric failure reads as an infinite loss.
struct Evaluation {
  double loss = 0.0;
  Eigen::VectorXd grad;
  std::string error;
};

Evaluation Evaluate(const TransformTree& tree, const Eigen::VectorXd& theta,
                    const DemoSet& demos, const LossSpec& loss,
                    const Eigen::VectorXd& mask,
                    const std::vector<int>& samples) {
  Evaluation out;
  try {
    LossAndGradient lg =
        EvaluateLossAndGradient(tree, theta, demos, loss, samples);
    out.loss = lg.loss;
    out.grad = lg.grad.cwiseProduct(mask);
    if (!out.grad.allFinite()) out.loss = std::nan("");
  } catch (const NumericError& e) {
    out.loss = std::nan("");
    out.error = e.what();
  }
  return out;
}

}  // namespace

TrainResult Train(const TransformTree& tree, const ParamVector& params,
                  const DemoSet& demos, const LossSpec& loss,
                  const TrainOptions& options) {
  if (loss.kind == LossKind::kIndependentBaseline) {
    return TrainIndependentBaseline(tree, params, demos, options);
  }
  ValidateLossSpec(loss, tree);
  demos.Validate();
  if (demos.dim() != tree.root_dim()) {
    throw StructuralError("demonstrations have dimension " +
                          std::to_string(demos.dim()) + ", tree root has " +
                          std::to_string(tree.root_dim()));
  }
  if (options.iterations < 0) throw StructuralError("iterations must be >= 0");
  if (options.alpha && !(*options.alpha > 0.0)) {
    throw StructuralError("alpha must be > 0");
  }
  if (options.minibatch < 0) throw StructuralError("minibatch must be >= 0");
  if (!(options.momentum >= 0.0 && options.momentum < 1.0)) {
    throw StructuralError("momentum must be in [0, 1)");
  }

  TrainResult result;
  result.params = params;
  const Eigen::VectorXd mask = params.TrainableMask();
  Eigen::VectorXd theta = params.values();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(theta.size());
  std::optional<double> alpha = options.alpha;

  const int total = demos.num_samples();
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(options.seed);
  auto batch = [&]() -> std::vector<int> {
    if (options.minibatch <= 0 || options.minibatch >= total) return {};
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> chosen(order.begin(), order.begin() + options.minibatch);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  };

  auto abort = [&](const Evaluation& eval, const Eigen::VectorXd& last_good) {
    result.status = TrainStatus::kAborted;
    result.message =
        eval.error.empty() ? "loss became non-finite" : eval.error;
    result.params.SetValues(last_good);
    result.alpha = alpha.value_or(0.0);
    return result;
  };

  Eigen::VectorXd last_good = theta;
  for (int it = 0; it < options.iterations; ++it) {
    const std::vector<int> samples = batch();
    const Evaluation eval = Evaluate(tree, theta, demos, loss, mask, samples);
    if (!std::isfinite(eval.loss)) return abort(eval, last_good);
    last_good = theta;
    result.history.push_back(eval.loss);

    if (!alpha) {
      const double slope = eval.grad.squaredNorm();
      double step = options.initial_alpha;
      for (int tries = 0; tries < 80; ++tries, step *= 0.5) {
        const Evaluation trial = Evaluate(tree, theta - step * eval.grad, demos,
                                          loss, mask, samples);
        if (std::isfinite(trial.loss) &&
            trial.loss <= eval.loss - options.armijo * step * slope) {
          break;
        }
      }
      alpha = step;
    }
    velocity = options.momentum * velocity - *alpha * eval.grad;
    theta += velocity;
  }

  const Evaluation final_eval = Evaluate(tree, theta, demos, loss, mask, {});
  if (!std::isfinite(final_eval.loss)) return abort(final_eval, last_good);
  result.history.push_back(final_eval.loss);
  result.params.SetValues(theta);
  result.alpha = alpha.value_or(0.0);
  return result;
}

TrainResult TrainIndependentBaseline(const TransformTree& tree,
                                     const ParamVector& params,
                                     const DemoSet& demos,
                                     const TrainOptions& options) {
  for (int k = 0; k < tree.num_leaves(); ++k) {
    const TreeLeaf& leaf = tree.leaves()[k];
    const bool learned =
        leaf.policy->parameterized() || tree.PathParameterized(leaf.node);
    if (learned && leaf.policy->kind() != LeafPolicy::Kind::kNaturalGradient) {
      throw StructuralError("independent baseline requires natural-gradient "
                            "learnable leaves; " +
                            tree.LeafLabel(k) + " is not");
    }
  }
  demos.Validate();

  TrainResult result;
  result.params = params;
  const LossSpec joint{LossKind::kJointSpace, {}};
  for (int node : BaselineGroups(tree)) {
    const TransformTree subtree = tree.Subtree(node);
    const DemoSet mapped =
        MapDemosToNode(tree, result.params.values(), demos, node);
    TrainResult group =
        Train(subtree, result.params, mapped, joint, options);
    result.history.insert(result.history.end(), group.history.begin(),
                          group.history.end());
    result.params = std::move(group.params);
    result.alpha = group.alpha;
    if (group.status == TrainStatus::kAborted) {
      result.status = TrainStatus::kAborted;
      result.message = tree.NodeLabel(node) + ": " + group.message;
      return result;
    }
  }
  return result;
}

}  // namespace tree_motion
