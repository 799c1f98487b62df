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

#include "tree_motion/gradients.h"

#include <utility>
#include <vector>

#include "tree_motion/errors.h"
#include "tree_motion/parallel.h"

namespace tree_motion {

void AccumulatePolicyVjp(const TransformTree& tree, const TreeStates& states,
                         const Eigen::VectorXd& theta, const Eigen::VectorXd& pi,
                         const Eigen::VectorXd& g,
                         Eigen::Ref<Eigen::VectorXd> grad) {
  const int n = tree.num_nodes();
  const Eigen::VectorXd lambda = states[0].pulled_metric.llt().solve(g);

  // Push lambda and pi forward to every node.
  std::vector<Eigen::VectorXd> a(n), b(n);
  a[0] = lambda;
  b[0] = pi;
  for (const TreeEdge& edge : tree.edges()) {
    a[edge.child] = states[edge.child].jac_to_parent * a[edge.parent];
    b[edge.child] = states[edge.child].jac_to_parent * b[edge.parent];
  }

  // Edges whose map, or any map above them, carries parameters need the full
  // coordinate/Jacobian backward sweep; elsewhere only leaf terms matter.
  std::vector<bool> upstream_params(n, false);
  for (const TreeEdge& edge : tree.edges()) {
    upstream_params[edge.child] =
        upstream_params[edge.parent] || edge.map->parameterized();
  }

  std::vector<Eigen::VectorXd> coord_bar(n), a_bar(n), b_bar(n);
  for (int u = 0; u < n; ++u) {
    const int dim = tree.nodes()[u].dim;
    coord_bar[u] = Eigen::VectorXd::Zero(dim);
    a_bar[u] = Eigen::VectorXd::Zero(dim);
    b_bar[u] = Eigen::VectorXd::Zero(dim);
  }

  for (const TreeLeaf& leaf : tree.leaves()) {
    const int u = leaf.node;
    const NodeState& state = states[u];
    leaf.policy->AccumulateGrad(state.coord, theta, a[u], b[u], coord_bar[u],
                                grad);
    a_bar[u] += state.pulled_force - state.pulled_metric * b[u];
    b_bar[u] -= state.pulled_metric.transpose() * a[u];
  }

  for (int c = n - 1; c >= 1; --c) {
    if (!upstream_params[c]) continue;
    const TreeEdge& edge = tree.edge_into(c);
    const int u = edge.parent;
    const Eigen::MatrixXd& jac = states[c].jac_to_parent;
    const Eigen::VectorXd& x = states[u].coord;
    a_bar[u].noalias() += jac.transpose() * a_bar[c];
    b_bar[u].noalias() += jac.transpose() * b_bar[c];
    edge.map->AccumulateVjp(x, theta, coord_bar[c], coord_bar[u], grad);
    edge.map->AccumulateJacobianBilinear(x, theta, a_bar[c], a[u],
                                         coord_bar[u], grad);
    edge.map->AccumulateJacobianBilinear(x, theta, b_bar[c], b[u],
                                         coord_bar[u], grad);
  }
}

PolicyVjpResult PolicyVjp(const TransformTree& tree, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& theta,
                          const Eigen::VectorXd& g) {
  TreeStates states = ForwardPass(tree, q, theta);
  LeafEvaluate(tree, states, theta);
  BackwardPass(tree, states);
  PolicyVjpResult out;
  out.pi = Resolve(states);
  out.grad = Eigen::VectorXd::Zero(theta.size());
  AccumulatePolicyVjp(tree, states, theta, out.pi, g, out.grad);
  return out;
}

Eigen::MatrixXd PolicyParamJacobian(const TransformTree& tree,
                                    const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& theta) {
  const int d = tree.root_dim();
  TreeStates states = ForwardPass(tree, q, theta);
  LeafEvaluate(tree, states, theta);
  BackwardPass(tree, states);
  const Eigen::VectorXd pi = Resolve(states);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, theta.size());
  for (int r = 0; r < d; ++r) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(theta.size());
    AccumulatePolicyVjp(tree, states, theta, pi,
                        Eigen::VectorXd::Unit(d, r), row);
    jac.row(r) = row.transpose();
  }
  return jac;
}

LossAndGradient EvaluateLossAndGradient(const TransformTree& tree,
                                        const Eigen::VectorXd& theta,
                                        const DemoSet& demos,
                                        const LossSpec& spec,
                                        const std::vector<int>& samples) {
  if (spec.kind == LossKind::kIndependentBaseline) {
    LossAndGradient total{0.0, Eigen::VectorXd::Zero(theta.size())};
    const LossSpec joint{LossKind::kJointSpace, {}};
    for (int node : BaselineGroups(tree)) {
      const LossAndGradient group = EvaluateLossAndGradient(
          tree.Subtree(node), theta, MapDemosToNode(tree, theta, demos, node),
          joint, samples);
      total.loss += group.loss;
      total.grad += group.grad;
    }
    return total;
  }
  if (spec.kind == LossKind::kSubtaskSpace &&
      static_cast<int>(spec.lambda.size()) != tree.num_leaves()) {
    throw StructuralError("lambda size does not match the leaf count");
  }

  const std::vector<const Sample*> all = demos.Flatten();
  std::vector<int> index = samples;
  if (index.empty()) {
    index.resize(all.size());
    for (size_t i = 0; i < all.size(); ++i) index[i] = static_cast<int>(i);
  }

  std::vector<double> losses(index.size());
  std::vector<Eigen::VectorXd> grads(index.size());
  ParallelFor(index.size(), [&](std::size_t i) {
    const Sample& s = *all.at(index[i]);
    TreeStates states = ForwardPass(tree, s.q, theta);
    LeafEvaluate(tree, states, theta);
    BackwardPass(tree, states);
    const Eigen::VectorXd pi = Resolve(states);
    const SampleLoss term =
        spec.kind == LossKind::kJointSpace
            ? JointSampleLoss(s.qdot, pi)
            : SubtaskSampleLoss(tree, states, spec.lambda, s.qdot, pi);
    losses[i] = term.value;
    grads[i] = Eigen::VectorXd::Zero(theta.size());
    if (!term.dloss_dpi.isZero(0.0)) {
      AccumulatePolicyVjp(tree, states, theta, pi, term.dloss_dpi, grads[i]);
    }
  });

  LossAndGradient out{0.0, Eigen::VectorXd::Zero(theta.size())};
  for (size_t i = 0; i < index.size(); ++i) {
    out.loss += losses[i];
    out.grad += grads[i];
  }
  return out;
}

Eigen::VectorXd LossGradient(const LossSpec& spec, const DemoSet& demos,
                             const TransformTree& tree,
                             const Eigen::VectorXd& theta) {
  return EvaluateLossAndGradient(tree, theta, demos, spec).grad;
}

}  // namespace tree_motion
