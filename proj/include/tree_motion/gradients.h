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

#ifndef TREE_MOTION_GRADIENTS_H_
#define TREE_MOTION_GRADIENTS_H_

#include <Eigen/Dense>

#include "tree_motion/demos.h"
#include "tree_motion/losses.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {

// Given a completed forward/leaf/backward pass with root solution pi and a
// cotangent g on pi, accumulates grad += (d pi / d theta)^T g.
//
// With lambda = M_r^{-1} g, g^T d pi = lambda^T dp_r - lambda^T dM_r pi, and
// both terms are sums over leaves of a_k^T p_k - a_k^T M_k b_k where a_k, b_k
// are lambda and pi pushed forward to leaf k. The sweep differentiates that
// scalar back through the leaves and edges, including the dependence of edge
// Jacobians on node coordinates.
void AccumulatePolicyVjp(const TransformTree& tree, const TreeStates& states,
                         const Eigen::VectorXd& theta, const Eigen::VectorXd& pi,
                         const Eigen::VectorXd& g,
                         Eigen::Ref<Eigen::VectorXd> grad);

struct PolicyVjpResult {
  Eigen::VectorXd pi;
  Eigen::VectorXd grad;
};
PolicyVjpResult PolicyVjp(const TransformTree& tree, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& theta,
                          const Eigen::VectorXd& g);

// d pi / d theta, root_dim x theta.size(), one reverse sweep per row.
Eigen::MatrixXd PolicyParamJacobian(const TransformTree& tree,
                                    const Eigen::VectorXd& q,
                                    const Eigen::VectorXd& theta);

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd grad;  // full theta size; frozen entries are not masked
};

// Subtask- or joint-space loss and its gradient, summed over samples in a
// fixed order. `samples` restricts the sum to a subset of the flattened demo
// samples (all when empty).
LossAndGradient EvaluateLossAndGradient(const TransformTree& tree,
                                        const Eigen::VectorXd& theta,
                                        const DemoSet& demos,
                                        const LossSpec& spec,
                                        const std::vector<int>& samples = {});

Eigen::VectorXd LossGradient(const LossSpec& spec, const DemoSet& demos,
                             const TransformTree& tree,
                             const Eigen::VectorXd& theta);

}  // namespace tree_motion

#endif  // TREE_MOTION_GRADIENTS_H_
