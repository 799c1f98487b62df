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

#ifndef TREE_MOTION_LOSSES_H_
#define TREE_MOTION_LOSSES_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tree_motion/demos.h"
#include "tree_motion/transform_tree.h"

namespace tree_motion {

enum class LossKind { kSubtaskSpace, kJointSpace, kIndependentBaseline };

LossKind ParseLossKind(const std::string& name);
std::string LossKindName(LossKind kind);

struct LossSpec {
  LossKind kind = LossKind::kSubtaskSpace;
  // One weight per tree leaf, in tree.leaves() order (subtask loss only).
  std::vector<double> lambda;
};

// lambda_k = 1 for leaves that carry parameters or sit below a parameterized
// map, 0 for hand-designed leaves.
std::vector<double> DefaultLambda(const TransformTree& tree);

// Throws StructuralError unless lambda has one finite non-negative entry per
// leaf, at least one of them positive, and no weighted subtask node depends on
// parameters.
void ValidateLossSpec(const LossSpec& spec, const TransformTree& tree);

// Loss of one demonstration sample and its gradient with respect to pi(q).
struct SampleLoss {
  double value = 0.0;
  Eigen::VectorXd dloss_dpi;
};

// ||qdot - pi||^2
SampleLoss JointSampleLoss(const Eigen::VectorXd& qdot,
                           const Eigen::VectorXd& pi);

// sum_k lambda_k ||J_k (qdot - pi)||^2 with J_k the Jacobian of leaf k's
// subtask node, taken from a forward pass at the sample.
SampleLoss SubtaskSampleLoss(const TransformTree& tree,
                             const TreeStates& states,
                             const std::vector<double>& lambda,
                             const Eigen::VectorXd& qdot,
                             const Eigen::VectorXd& pi);

// Summed over every demonstration sample.
double JointLoss(const TransformTree& tree, const Eigen::VectorXd& theta,
                 const DemoSet& demos);
double SubtaskLoss(const TransformTree& tree, const Eigen::VectorXd& theta,
                   const DemoSet& demos, const std::vector<double>& lambda);

// Subtask nodes that own an independently trained group of learnable leaves.
std::vector<int> BaselineGroups(const TransformTree& tree);

// Demonstrations pushed forward to `node`: z = psi(q), zdot = J qdot.
DemoSet MapDemosToNode(const TransformTree& tree, const Eigen::VectorXd& theta,
                       const DemoSet& demos, int node);

// sum over groups s of sum_{i,t} ||J_s qdot - pi_s(psi_s(q))||^2, where pi_s is
// the policy of the subtree below s resolved on its own.
double IndependentBaselineLoss(const TransformTree& tree,
                               const Eigen::VectorXd& theta,
                               const DemoSet& demos);

double EvaluateLoss(const TransformTree& tree, const Eigen::VectorXd& theta,
                    const DemoSet& demos, const LossSpec& spec);

}  // namespace tree_motion

#endif  // TREE_MOTION_LOSSES_H_
