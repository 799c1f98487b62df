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

#ifndef TREE_MOTION_TRANSFORM_TREE_H_
#define TREE_MOTION_TRANSFORM_TREE_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tree_motion/maps.h"
#include "tree_motion/policies.h"

namespace tree_motion {

struct TreeNode {
  int id = 0;
  int dim = 0;
  std::string name;
};

struct TreeEdge {
  int parent = 0;
  int child = 0;
  std::shared_ptr<const DifferentiableMap> map;
  std::string name;
};

struct TreeLeaf {
  int node = 0;
  std::shared_ptr<const LeafPolicy> policy;
  std::string name;
};

// Rooted tree of coordinate spaces. Node 0 is the configuration space; every
// other node has exactly one incoming edge from a node with a smaller id, so
// ascending id order is a topological order. Every childless node carries
// exactly one leaf policy.
class TransformTree {
 public:
  // Validates the structure; throws StructuralError naming the offending
  // node, edge, or leaf.
  TransformTree(std::vector<TreeNode> nodes, std::vector<TreeEdge> edges,
                std::vector<TreeLeaf> leaves);

  int root_dim() const { return nodes_[0].dim; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<TreeLeaf>& leaves() const { return leaves_; }
  int num_leaves() const { return static_cast<int>(leaves_.size()); }

  // Incoming edge of a non-root node.
  const TreeEdge& edge_into(int node) const { return edges_[node - 1]; }
  // Edges indexed by child - 1, i.e. in topological order.
  const std::vector<TreeEdge>& edges() const { return edges_; }
  const std::vector<int>& children(int node) const { return children_[node]; }
  // Index into leaves() of the policy at `node`, or -1.
  int leaf_index(int node) const { return leaf_at_[node]; }

  std::string NodeLabel(int node) const;
  std::string EdgeLabel(const TreeEdge& edge) const;
  std::string LeafLabel(int leaf) const;

  // Nodes on the path root -> node, root first.
  std::vector<int> PathFromRoot(int node) const;

  // Node whose coordinates define the task space of `leaf`: the leaf node
  // itself, or, when the leaf sits below parameterized (learned latent) maps,
  // the first ancestor reached through fixed maps only.
  int SubtaskNode(int leaf) const;

  // True if any edge on the root -> node path is parameterized.
  bool PathParameterized(int node) const;

  // The subtree rooted at `node`, renumbered with `node` as the new root.
  // Maps and policies are shared with this tree.
  TransformTree Subtree(int node) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<TreeEdge> edges_;
  std::vector<TreeLeaf> leaves_;
  std::vector<std::vector<int>> children_;
  std::vector<int> leaf_at_;
};

// Per-node scratch for one evaluation.
struct NodeState {
  Eigen::VectorXd coord;
  Eigen::MatrixXd jac_to_parent;  // empty at the root
  Eigen::VectorXd pulled_force;
  Eigen::MatrixXd pulled_metric;
};

using TreeStates = std::vector<NodeState>;

// Stage 1: node coordinates and edge Jacobians, root to leaves.
TreeStates ForwardPass(const TransformTree& tree, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& theta);

// Stage 2: p = M v (or -grad Phi) and M at every leaf.
void LeafEvaluate(const TransformTree& tree, TreeStates& states,
                  const Eigen::VectorXd& theta);

// Stage 3: p_u = sum J^T p_child, M_u = sum J^T M_child J, leaves to root.
void BackwardPass(const TransformTree& tree, TreeStates& states);

// Stage 4: solve (M_r + reg I) u = p_r. With reg = 0 this is a Cholesky solve
// that throws SingularMetricError when M_r has an eigenvalue below
// kSingularEigenvalue; with reg > 0 it is an eigendecomposition solve.
inline constexpr double kSingularEigenvalue = 1e-12;
Eigen::VectorXd Resolve(const TreeStates& states, double regularization = 0.0);

// All four stages.
Eigen::VectorXd EvaluatePolicy(const TransformTree& tree,
                               const Eigen::VectorXd& q,
                               const Eigen::VectorXd& theta,
                               double regularization = 0.0);

// Root quantities of one evaluation.
struct RootSolution {
  Eigen::VectorXd velocity;  // pi(q)
  Eigen::VectorXd force;     // p_r
  Eigen::MatrixXd metric;    // M_r
};
RootSolution SolveAtRoot(const TransformTree& tree, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& theta,
                         double regularization = 0.0);

// Jacobian of every node's coordinates with respect to q, from the edge
// Jacobians of a forward pass.
std::vector<Eigen::MatrixXd> NodeJacobians(const TransformTree& tree,
                                           const TreeStates& states);

// Sum of leaf potentials at the forward-pass coordinates, or empty if any leaf
// is not a gradient flow.
std::optional<double> RootPotential(const TransformTree& tree,
                                    const TreeStates& states,
                                    const Eigen::VectorXd& theta);

}  // namespace tree_motion

#endif  // TREE_MOTION_TRANSFORM_TREE_H_
