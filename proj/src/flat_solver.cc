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

#include "tree_motion/flat_solver.h"

#include <sstream>
#include <vector>

#include "tree_motion/errors.h"

namespace tree_motion {

Eigen::VectorXd FlatSolve(const TransformTree& tree, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& theta, double regularization) {
  const int d = tree.root_dim();
  if (q.size() != d) {
    throw StructuralError("configuration has the wrong dimension");
  }
  Eigen::MatrixXd normal = regularization * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);

  for (int k = 0; k < tree.num_leaves(); ++k) {
    const TreeLeaf& leaf = tree.leaves()[k];
    const std::vector<int> path = tree.PathFromRoot(leaf.node);
    Eigen::VectorXd z = q;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(d, d);
    for (size_t i = 1; i < path.size(); ++i) {
      const DifferentiableMap& map = *tree.edge_into(path[i]).map;
      jac = map.Jacobian(z, theta) * jac;
      z = map.Value(z, theta);
    }
    const Eigen::MatrixXd metric = leaf.policy->Evaluate(z, theta).metric;
    const Eigen::VectorXd velocity = leaf.policy->Velocity(z, theta);
    if (!metric.allFinite() || !velocity.allFinite()) {
      throw NumericError(tree.LeafLabel(k) + " produced a non-finite policy");
    }
    normal.noalias() += jac.transpose() * metric * jac;
    rhs.noalias() += jac.transpose() * (metric * velocity);
  }
  normal = 0.5 * (normal + normal.transpose());

  const double min_eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(normal,
                                                     Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  if (!(min_eig >= kSingularEigenvalue)) {
    std::ostringstream msg;
    msg << "normal matrix is singular (min eigenvalue " << min_eig << ")";
    throw SingularMetricError(msg.str(), min_eig);
  }
  return normal.fullPivLu().solve(rhs);
}

}  // namespace tree_motion
