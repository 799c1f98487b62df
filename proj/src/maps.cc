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

#include "tree_motion/maps.h"

#include <cmath>
#include <sstream>
#include <utility>

#include "tree_motion/errors.h"

namespace tree_motion {

void DifferentiableMap::AccumulateVjp(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& ybar,
                                      Eigen::Ref<Eigen::VectorXd> xbar,
                                      Eigen::Ref<Eigen::VectorXd> grad) const {
  (void)grad;
  xbar.noalias() += Jacobian(x, theta).transpose() * ybar;
}

// ---------------------------------------------------------------------------

IdentityMap::IdentityMap(int dim) : dim_(dim) {
  if (dim <= 0) throw StructuralError("identity map needs a positive dimension");
}

Eigen::VectorXd IdentityMap::Value(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd&) const {
  return x;
}

Eigen::MatrixXd IdentityMap::Jacobian(const Eigen::VectorXd&,
                                      const Eigen::VectorXd&) const {
  return Eigen::MatrixXd::Identity(dim_, dim_);
}

// ---------------------------------------------------------------------------

LinearMap::LinearMap(Eigen::MatrixXd matrix, Eigen::VectorXd offset)
    : matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (matrix_.rows() == 0 || matrix_.cols() == 0) {
    throw StructuralError("linear map needs a non-empty matrix");
  }
  if (offset_.size() != matrix_.rows()) {
    throw StructuralError("linear map offset has the wrong length");
  }
}

LinearMap::LinearMap(Eigen::MatrixXd matrix)
    : LinearMap(matrix, Eigen::VectorXd::Zero(matrix.rows())) {}

Eigen::VectorXd LinearMap::Value(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd&) const {
  return matrix_ * x + offset_;
}

Eigen::MatrixXd LinearMap::Jacobian(const Eigen::VectorXd&,
                                    const Eigen::VectorXd&) const {
  return matrix_;
}

// ---------------------------------------------------------------------------

PlanarArmFk::PlanarArmFk(std::vector<double> lengths, int point)
    : lengths_(std::move(lengths)), point_(point) {
  if (lengths_.empty()) throw StructuralError("planar arm needs >= 1 link");
  for (double l : lengths_) {
    if (!(l > 0.0)) throw StructuralError("planar arm link lengths must be > 0");
  }
  const int links = static_cast<int>(lengths_.size());
  if (point_ < 0) point_ = links - 1;
  if (point_ >= links) {
    std::ostringstream msg;
    msg << "planar arm point " << point_ << " out of range for " << links
        << " links";
    throw StructuralError(msg.str());
  }
}

Eigen::VectorXd PlanarArmFk::Value(const Eigen::VectorXd& q,
                                   const Eigen::VectorXd&) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  double angle = 0.0;
  for (int i = 0; i <= point_; ++i) {
    angle += q[i];
    p[0] += lengths_[i] * std::cos(angle);
    p[1] += lengths_[i] * std::sin(angle);
  }
  return p;
}

Eigen::MatrixXd PlanarArmFk::Jacobian(const Eigen::VectorXd& q,
                                      const Eigen::VectorXd&) const {
  const int links = input_dim();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, links);
  // Column j sums the contributions of links j..point.
  double angle = q.head(point_ + 1).sum();
  Eigen::Vector2d tail = Eigen::Vector2d::Zero();
  for (int i = point_; i >= 0; --i) {
    tail += lengths_[i] * Eigen::Vector2d(-std::sin(angle), std::cos(angle));
    jac.col(i) = tail;
    angle -= q[i];
  }
  return jac;
}

void PlanarArmFk::AccumulateJacobianBilinear(
    const Eigen::VectorXd& q, const Eigen::VectorXd&, const Eigen::VectorXd& u,
    const Eigen::VectorXd& v, Eigen::Ref<Eigen::VectorXd> xbar,
    Eigen::Ref<Eigen::VectorXd>) const {
  // u^T J v = sum_i l_i u^T [-sin a_i, cos a_i] V_i with V_i = v_0 + ... + v_i,
  // and a_i depends on q_m for every m <= i.
  std::vector<double> weight(point_ + 1);
  double angle = 0.0;
  double cumulative_v = 0.0;
  for (int i = 0; i <= point_; ++i) {
    angle += q[i];
    cumulative_v += v[i];
    weight[i] = lengths_[i] * cumulative_v *
                (-u[0] * std::cos(angle) - u[1] * std::sin(angle));
  }
  double tail = 0.0;
  for (int m = point_; m >= 0; --m) {
    tail += weight[m];
    xbar[m] += tail;
  }
}

// ---------------------------------------------------------------------------

DistanceToPoint::DistanceToPoint(Eigen::VectorXd center)
    : center_(std::move(center)) {
  if (center_.size() == 0) throw StructuralError("distance center is empty");
}

double DistanceToPoint::Radius(const Eigen::VectorXd& x) const {
  const double r = (x - center_).norm();
  if (!(r > kDegenerateRadius)) {
    throw DomainError("distance_to_point evaluated within 1e-9 of its center");
  }
  return r;
}

Eigen::VectorXd DistanceToPoint::Value(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Constant(1, Radius(x));
}

Eigen::MatrixXd DistanceToPoint::Jacobian(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd&) const {
  const double r = Radius(x);
  return ((x - center_) / r).transpose();
}

void DistanceToPoint::AccumulateJacobianBilinear(
    const Eigen::VectorXd& x, const Eigen::VectorXd&, const Eigen::VectorXd& u,
    const Eigen::VectorXd& v, Eigen::Ref<Eigen::VectorXd> xbar,
    Eigen::Ref<Eigen::VectorXd>) const {
  const double r = Radius(x);
  const Eigen::VectorXd e = (x - center_) / r;
  xbar += u[0] * (v - e * e.dot(v)) / r;
}

}  // namespace tree_motion
