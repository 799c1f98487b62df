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

#ifndef TREE_MOTION_FLAT_SOLVER_H_
#define TREE_MOTION_FLAT_SOLVER_H_

#include <Eigen/Dense>

#include "tree_motion/transform_tree.h"

namespace tree_motion {

// Solves argmin_u sum_k ||v_k - J_k u||^2_{M_k} directly: each root-to-leaf
// map psi_k and its chain-rule Jacobian J_k are composed per leaf, with no
// sharing of intermediate nodes, then the normal equations
//   (sum J_k^T M_k J_k + reg I) u = sum J_k^T M_k v_k
// are assembled and solved with a pivoted LU. For natural-gradient leaves v_k
// is materialized as -M_k^{-1} grad Phi_k. Same singularity contract as
// Resolve().
Eigen::VectorXd FlatSolve(const TransformTree& tree, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& theta,
                          double regularization = 0.0);

}  // namespace tree_motion

#endif  // TREE_MOTION_FLAT_SOLVER_H_
