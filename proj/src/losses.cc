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

#include "tree_motion/losses.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "tree_motion/errors.h"
#include "tree_motion/parallel.h"

namespace tree_motion {
namespace {

bool LeafIsLearned(const TransformTree& tree, int leaf) {
  return tree.leaves()[leaf].policy->parameterized() ||
         tree.PathParameterized(tree.leaves()[leaf].node);
}

// Sums per-sample values in sample order.
template <typename Fn>
double OrderedSum(int n, Fn fn) {
  std::vector<double> values(n);
  ParallelFor(n, [&](std::size_t i) { values[i] = fn(static_cast<int>(i)); });
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

}  // namespace

LossKind ParseLossKind(const std::string& name) {
  if (name == "subtask" || name == "subtask_space") {
    return LossKind::kSubtaskSpace;
  }
  if (name == "joint" || name == "joint_space") return LossKind::kJointSpace;
  if (name == "independent" || name == "independent_baseline") {
    return LossKind::kIndependentBaseline;
  }
  throw StructuralError("unknown loss kind '" + name +
                        "' (expected subtask, joint, or independent)");
}

std::string LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kSubtaskSpace:
      return "subtask";
    case LossKind::kJointSpace:
      return "joint";
    case LossKind::kIndependentBaseline:
      return "independent";
  }
  return "";
}

std::vector<double> DefaultLambda(const TransformTree& tree) {
  std::vector<double> lambda(tree.num_leaves(), 0.0);
  for (int k = 0; k < tree.num_leaves(); ++k) {
    if (LeafIsLearned(tree, k)) lambda[k] = 1.0;
  }
  return lambda;
}

void ValidateLossSpec(const LossSpec& spec, const TransformTree& tree) {
  if (spec.kind != LossKind::kSubtaskSpace) return;
  if (static_cast<int>(spec.lambda.size()) != tree.num_leaves()) {
    throw StructuralError("loss has " + std::to_string(spec.lambda.size()) +
                          " lambda weights for " +
                          std::to_string(tree.num_leaves()) + " leaves");
  }
  bool any_positive = false;
  for (int k = 0; k < tree.num_leaves(); ++k) {
    const double w = spec.lambda[k];
    if (!std::isfinite(w) || w < 0.0) {
      throw StructuralError("lambda for " + tree.LeafLabel(k) +
                            " must be finite and >= 0");
    }
    if (w > 0.0) {
      any_positive = true;
      if (tree.PathParameterized(tree.SubtaskNode(k))) {
        throw StructuralError("subtask space of " + tree.LeafLabel(k) +
                              " depends on learned maps");
      }
    }
  }
  if (!any_positive) {
    throw StructuralError("subtask loss needs at least one lambda > 0");
  }
}

SampleLoss JointSampleLoss(const Eigen::VectorXd& qdot,
                           const Eigen::VectorXd& pi) {
  const Eigen::VectorXd residual = qdot - pi;
  return {residual.squaredNorm(), -2.0 * residual};
}

SampleLoss SubtaskSampleLoss(const TransformTree& tree,
                             const TreeStates& states,
                             const std::vector<double>& lambda,
                             const Eigen::VectorXd& qdot,
                             const Eigen::VectorXd& pi) {
  const Eigen::VectorXd residual = qdot - pi;
  const std::vector<Eigen::MatrixXd> jacobians = NodeJacobians(tree, states);
  SampleLoss out{0.0, Eigen::VectorXd::Zero(pi.size())};
  for (int k = 0; k < tree.num_leaves(); ++k) {
    if (lambda[k] == 0.0) continue;
    const Eigen::MatrixXd& jac = jacobians[tree.SubtaskNode(k)];
    const Eigen::VectorXd task_residual = jac * residual;
    out.value += lambda[k] * task_residual.squaredNorm();
    out.dloss_dpi.noalias() -= 2.0 * lambda[k] * jac.transpose() * task_residual;
  }
  return out;
}

double JointLoss(const TransformTree& tree, const Eigen::VectorXd& theta,
                 const DemoSet& demos) {
  const std::vector<const Sample*> samples = demos.Flatten();
  return OrderedSum(static_cast<int>(samples.size()), [&](int i) {
    const Sample& s = *samples[i];
    return JointSampleLoss(s.qdot, EvaluatePolicy(tree, s.q, theta)).value;
  });
}

double SubtaskLoss(const TransformTree& tree, const Eigen::VectorXd& theta,
                   const DemoSet& demos, const std::vector<double>& lambda) {
  if (static_cast<int>(lambda.size()) != tree.num_leaves()) {
    throw StructuralError("lambda size does not match the leaf count");
  }
  const std::vector<const Sample*> samples = demos.Flatten();
  return OrderedSum(static_cast<int>(samples.size()), [&](int i) {
    const Sample& s = *samples[i];
    TreeStates states = ForwardPass(tree, s.q, theta);
    LeafEvaluate(tree, states, theta);
    BackwardPass(tree, states);
    const Eigen::VectorXd pi = Resolve(states);
    return SubtaskSampleLoss(tree, states, lambda, s.qdot, pi).value;
  });
}

std::vector<int> BaselineGroups(const TransformTree& tree) {
  std::set<int> groups;
  for (int k = 0; k < tree.num_leaves(); ++k) {
    if (LeafIsLearned(tree, k)) groups.insert(tree.SubtaskNode(k));
  }
  return {groups.begin(), groups.end()};
}

DemoSet MapDemosToNode(const TransformTree& tree, const Eigen::VectorXd& theta,
                       const DemoSet& demos, int node) {
  const std::vector<int> path = tree.PathFromRoot(node);
  DemoSet mapped;
  for (const Trajectory& traj : demos.trajectories) {
    Trajectory out;
    for (const Sample& s : traj) {
      Eigen::VectorXd z = s.q;
      Eigen::VectorXd zdot = s.qdot;
      for (size_t i = 1; i < path.size(); ++i) {
        const DifferentiableMap& map = *tree.edge_into(path[i]).map;
        zdot = map.Jacobian(z, theta) * zdot;
        z = map.Value(z, theta);
      }
      out.push_back({s.t, z, zdot});
    }
    mapped.trajectories.push_back(std::move(out));
  }
  return mapped;
}

double IndependentBaselineLoss(const TransformTree& tree,
                               const Eigen::VectorXd& theta,
                               const DemoSet& demos) {
  double total = 0.0;
  for (int node : BaselineGroups(tree)) {
    const TransformTree subtree = tree.Subtree(node);
    total += JointLoss(subtree, theta, MapDemosToNode(tree, theta, demos, node));
  }
  return total;
}

double EvaluateLoss(const TransformTree& tree, const Eigen::VectorXd& theta,
                    const DemoSet& demos, const LossSpec& spec) {
  switch (spec.kind) {
    case LossKind::kSubtaskSpace:
      return SubtaskLoss(tree, theta, demos, spec.lambda);
    case LossKind::kJointSpace:
      return JointLoss(tree, theta, demos);
    case LossKind::kIndependentBaseline:
      return IndependentBaselineLoss(tree, theta, demos);
  }
  return 0.0;
}

}  // namespace tree_motion
