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

#include "tree_motion/transform_tree.h"

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>

#include "tree_motion/errors.h"

namespace tree_motion {

TransformTree::TransformTree(std::vector<TreeNode> nodes,
                             std::vector<TreeEdge> edges,
                             std::vector<TreeLeaf> leaves)
    : nodes_(std::move(nodes)), leaves_(std::move(leaves)) {
  const int n = static_cast<int>(nodes_.size());
  if (n == 0) throw StructuralError("tree has no nodes");
  std::sort(nodes_.begin(), nodes_.end(),
            [](const TreeNode& a, const TreeNode& b) { return a.id < b.id; });
  for (int i = 0; i < n; ++i) {
    if (nodes_[i].id != i) {
      throw StructuralError(
          "node ids must be contiguous from 0 (root); missing id " +
          std::to_string(i));
    }
    if (nodes_[i].dim <= 0) {
      throw StructuralError(NodeLabel(i) + " has non-positive dimension");
    }
  }

  std::vector<const TreeEdge*> incoming(n, nullptr);
  for (const TreeEdge& edge : edges) {
    if (edge.parent < 0 || edge.parent >= n || edge.child <= 0 ||
        edge.child >= n) {
      throw StructuralError(EdgeLabel(edge) + " references an unknown node");
    }
    if (edge.parent >= edge.child) {
      throw StructuralError(EdgeLabel(edge) +
                            ": parent id must be smaller than child id");
    }
    if (incoming[edge.child] != nullptr) {
      throw StructuralError(NodeLabel(edge.child) +
                            " has more than one parent edge");
    }
    if (!edge.map) throw StructuralError(EdgeLabel(edge) + " has no map");
    if (edge.map->input_dim() != nodes_[edge.parent].dim ||
        edge.map->output_dim() != nodes_[edge.child].dim) {
      std::ostringstream msg;
      msg << EdgeLabel(edge) << ": map " << edge.map->kind() << " is "
          << edge.map->input_dim() << " -> " << edge.map->output_dim()
          << " but nodes are " << nodes_[edge.parent].dim << " -> "
          << nodes_[edge.child].dim;
      throw StructuralError(msg.str());
    }
    incoming[edge.child] = &edge;
  }
  for (int i = 1; i < n; ++i) {
    if (incoming[i] == nullptr) {
      throw StructuralError(NodeLabel(i) + " is not connected to the root");
    }
    edges_.push_back(*incoming[i]);
  }

  children_.assign(n, {});
  for (const TreeEdge& edge : edges_) children_[edge.parent].push_back(edge.child);

  leaf_at_.assign(n, -1);
  for (int k = 0; k < num_leaves(); ++k) {
    const TreeLeaf& leaf = leaves_[k];
    if (leaf.node < 0 || leaf.node >= n) {
      throw StructuralError(LeafLabel(k) + " references an unknown node");
    }
    if (!leaf.policy) throw StructuralError(LeafLabel(k) + " has no policy");
    if (!children_[leaf.node].empty()) {
      throw StructuralError(LeafLabel(k) + " is attached to interior " +
                            NodeLabel(leaf.node));
    }
    if (leaf_at_[leaf.node] >= 0) {
      throw StructuralError(NodeLabel(leaf.node) + " has more than one policy");
    }
    if (leaf.policy->dim() != nodes_[leaf.node].dim) {
      std::ostringstream msg;
      msg << LeafLabel(k) << ": policy dimension " << leaf.policy->dim()
          << " != node dimension " << nodes_[leaf.node].dim;
      throw StructuralError(msg.str());
    }
    leaf_at_[leaf.node] = k;
  }
  for (int i = 0; i < n; ++i) {
    if (children_[i].empty() && leaf_at_[i] < 0) {
      throw StructuralError(NodeLabel(i) + " is a leaf without a policy");
    }
  }
}

std::string TransformTree::NodeLabel(int node) const {
  std::ostringstream out;
  out << "node " << node;
  if (node >= 0 && node < num_nodes() && !nodes_[node].name.empty()) {
    out << " ('" << nodes_[node].name << "')";
  }
  return out.str();
}

std::string TransformTree::EdgeLabel(const TreeEdge& edge) const {
  std::ostringstream out;
  out << "edge " << edge.parent << "->" << edge.child;
  if (!edge.name.empty()) out << " ('" << edge.name << "')";
  return out.str();
}

std::string TransformTree::LeafLabel(int leaf) const {
  std::ostringstream out;
  out << "leaf " << leaf;
  if (!leaves_[leaf].name.empty()) out << " ('" << leaves_[leaf].name << "')";
  out << " at node " << leaves_[leaf].node;
  return out.str();
}

std::vector<int> TransformTree::PathFromRoot(int node) const {
  std::vector<int> path{node};
  while (path.back() != 0) path.push_back(edge_into(path.back()).parent);
  std::reverse(path.begin(), path.end());
  return path;
}

int TransformTree::SubtaskNode(int leaf) const {
  int node = leaves_[leaf].node;
  while (node != 0 && edge_into(node).map->parameterized()) {
    node = edge_into(node).parent;
  }
  return node;
}

bool TransformTree::PathParameterized(int node) const {
  for (; node != 0; node = edge_into(node).parent) {
    if (edge_into(node).map->parameterized()) return true;
  }
  return false;
}

TransformTree TransformTree::Subtree(int node) const {
  std::map<int, int> renumber{{node, 0}};
  for (int i = node + 1; i < num_nodes(); ++i) {
    if (renumber.count(edge_into(i).parent)) {
      const int next = static_cast<int>(renumber.size());
      renumber[i] = next;
    }
  }
  std::vector<TreeNode> nodes;
  std::vector<TreeEdge> edges;
  std::vector<TreeLeaf> leaves;
  for (const auto& [old_id, new_id] : renumber) {
    nodes.push_back({new_id, nodes_[old_id].dim, nodes_[old_id].name});
    if (old_id != node) {
      TreeEdge edge = edge_into(old_id);
      edge.parent = renumber.at(edge.parent);
      edge.child = new_id;
      edges.push_back(std::move(edge));
    }
    if (leaf_at_[old_id] >= 0) {
      TreeLeaf leaf = leaves_[leaf_at_[old_id]];
      leaf.node = new_id;
      leaves.push_back(std::move(leaf));
    }
  }
  return TransformTree(std::move(nodes), std::move(edges), std::move(leaves));
}

// ---------------------------------------------------------------------------

TreeStates ForwardPass(const TransformTree& tree, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& theta) {
  if (q.size() != tree.root_dim()) {
    throw StructuralError("configuration has dimension " +
                          std::to_string(q.size()) + ", tree root expects " +
                          std::to_string(tree.root_dim()));
  }
  TreeStates states(tree.num_nodes());
  states[0].coord = q;
  for (const TreeEdge& edge : tree.edges()) {
    const Eigen::VectorXd& x = states[edge.parent].coord;
    NodeState& child = states[edge.child];
    child.coord = edge.map->Value(x, theta);
    child.jac_to_parent = edge.map->Jacobian(x, theta);
    const int dim = tree.nodes()[edge.child].dim;
    if (child.coord.size() != dim || child.jac_to_parent.rows() != dim ||
        child.jac_to_parent.cols() != x.size()) {
      throw StructuralError(tree.EdgeLabel(edge) +
                            ": map output does not match node dimension");
    }
  }
  return states;
}

void LeafEvaluate(const TransformTree& tree, TreeStates& states,
                  const Eigen::VectorXd& theta) {
  for (int k = 0; k < tree.num_leaves(); ++k) {
    const TreeLeaf& leaf = tree.leaves()[k];
    NodeState& state = states[leaf.node];
    LeafOutput out = leaf.policy->Evaluate(state.coord, theta);
    if (!out.force.allFinite() || !out.metric.allFinite()) {
      throw NumericError(tree.LeafLabel(k) + " produced a non-finite policy");
    }
    state.pulled_force = std::move(out.force);
    state.pulled_metric = std::move(out.metric);
  }
}

void BackwardPass(const TransformTree& tree, TreeStates& states) {
  const int n = tree.num_nodes();
  for (int u = 0; u < n; ++u) {
    if (tree.children(u).empty()) continue;
    const int dim = tree.nodes()[u].dim;
    states[u].pulled_force = Eigen::VectorXd::Zero(dim);
    states[u].pulled_metric = Eigen::MatrixXd::Zero(dim, dim);
  }
  for (int c = n - 1; c >= 1; --c) {
    const int u = tree.edge_into(c).parent;
    const NodeState& child = states[c];
    NodeState& parent = states[u];
    const Eigen::MatrixXd& jac = child.jac_to_parent;
    parent.pulled_force.noalias() += jac.transpose() * child.pulled_force;
    parent.pulled_metric.noalias() +=
        jac.transpose() * child.pulled_metric * jac;
    // Children of u all have larger ids, so u is complete once its smallest
    // child is folded in.
    if (c == tree.children(u).front()) {
      parent.pulled_metric =
          0.5 * (parent.pulled_metric + parent.pulled_metric.transpose());
    }
  }
}

Eigen::VectorXd Resolve(const TreeStates& states, double regularization) {
  const Eigen::MatrixXd& metric = states[0].pulled_metric;
  const Eigen::VectorXd& force = states[0].pulled_force;
  if (regularization < 0.0) {
    throw StructuralError("regularization must be >= 0");
  }
  if (regularization > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(metric);
    const Eigen::VectorXd shifted =
        (eig.eigenvalues().array() + regularization).matrix();
    if ((shifted.array() <= 0.0).any()) {
      throw SingularMetricError("regularized root metric is not positive",
                                shifted.minCoeff());
    }
    return eig.eigenvectors() *
           (eig.eigenvectors().transpose() * force).cwiseQuotient(shifted);
  }
  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(metric,
                                                     Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(metric);
  if (llt.info() != Eigen::Success || !(min_eig >= kSingularEigenvalue)) {
    std::ostringstream msg;
    msg << "root metric is singular (min eigenvalue " << min_eig << ")";
    throw SingularMetricError(msg.str(), min_eig);
  }
  return llt.solve(force);
}

RootSolution SolveAtRoot(const TransformTree& tree, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& theta, double regularization) {
  TreeStates states = ForwardPass(tree, q, theta);
  LeafEvaluate(tree, states, theta);
  BackwardPass(tree, states);
  RootSolution out;
  out.velocity = Resolve(states, regularization);
  out.force = std::move(states[0].pulled_force);
  out.metric = std::move(states[0].pulled_metric);
  return out;
}

Eigen::VectorXd EvaluatePolicy(const TransformTree& tree,
                               const Eigen::VectorXd& q,
                               const Eigen::VectorXd& theta,
                               double regularization) {
  return SolveAtRoot(tree, q, theta, regularization).velocity;
}

std::vector<Eigen::MatrixXd> NodeJacobians(const TransformTree& tree,
                                           const TreeStates& states) {
  std::vector<Eigen::MatrixXd> jacobians(tree.num_nodes());
  jacobians[0] = Eigen::MatrixXd::Identity(tree.root_dim(), tree.root_dim());
  for (const TreeEdge& edge : tree.edges()) {
    jacobians[edge.child] =
        states[edge.child].jac_to_parent * jacobians[edge.parent];
  }
  return jacobians;
}

std::optional<double> RootPotential(const TransformTree& tree,
                                    const TreeStates& states,
                                    const Eigen::VectorXd& theta) {
  double total = 0.0;
  for (const TreeLeaf& leaf : tree.leaves()) {
    const std::optional<double> value =
        leaf.policy->PotentialValue(states[leaf.node].coord, theta);
    if (!value) return std::nullopt;
    total += *value;
  }
  return total;
}

}  // namespace tree_motion
