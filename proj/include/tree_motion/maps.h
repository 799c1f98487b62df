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

#ifndef TREE_MOTION_MAPS_H_
#define TREE_MOTION_MAPS_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tree_motion/param_vector.h"

namespace tree_motion {

// A smooth map between node coordinate spaces, used as a transform-tree edge.
//
// Parameterized maps read their values from the tree-wide parameter vector
// `theta` at param_slice(); parameter-free maps ignore it. Gradient
// accumulators (`grad`) are always full-size parameter vectors.
class DifferentiableMap {
 public:
  virtual ~DifferentiableMap() = default;

  virtual std::string kind() const = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual ParamSlice param_slice() const { return {}; }
  bool parameterized() const { return !param_slice().empty(); }

  virtual Eigen::VectorXd Value(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& theta) const = 0;
  // output_dim() x input_dim().
  virtual Eigen::MatrixXd Jacobian(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& theta) const = 0;

  // Reverse-mode sensitivities of ybar^T psi(x; theta):
  //   xbar += J^T ybar,  grad += (d psi / d theta)^T ybar.
  virtual void AccumulateVjp(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& ybar,
                             Eigen::Ref<Eigen::VectorXd> xbar,
                             Eigen::Ref<Eigen::VectorXd> grad) const;

  // Reverse-mode sensitivities of the bilinear form u^T J(x; theta) v with u, v
  // held fixed. Zero for affine maps.
  virtual void AccumulateJacobianBilinear(
      const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
      const Eigen::VectorXd& u, const Eigen::VectorXd& v,
      Eigen::Ref<Eigen::VectorXd> xbar,
      Eigen::Ref<Eigen::VectorXd> grad) const = 0;
};

class IdentityMap : public DifferentiableMap {
 public:
  explicit IdentityMap(int dim);

  std::string kind() const override { return "identity"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  Eigen::VectorXd Value(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateJacobianBilinear(const Eigen::VectorXd&,
                                  const Eigen::VectorXd&,
                                  const Eigen::VectorXd&,
                                  const Eigen::VectorXd&,
                                  Eigen::Ref<Eigen::VectorXd>,
                                  Eigen::Ref<Eigen::VectorXd>) const override {}

 private:
  int dim_;
};

// x -> A x + b.
class LinearMap : public DifferentiableMap {
 public:
  LinearMap(Eigen::MatrixXd matrix, Eigen::VectorXd offset);
  explicit LinearMap(Eigen::MatrixXd matrix);

  std::string kind() const override { return "linear"; }
  int input_dim() const override { return static_cast<int>(matrix_.cols()); }
  int output_dim() const override { return static_cast<int>(matrix_.rows()); }
  Eigen::VectorXd Value(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateJacobianBilinear(const Eigen::VectorXd&,
                                  const Eigen::VectorXd&,
                                  const Eigen::VectorXd&,
                                  const Eigen::VectorXd&,
                                  Eigen::Ref<Eigen::VectorXd>,
                                  Eigen::Ref<Eigen::VectorXd>) const override {}

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::VectorXd& offset() const { return offset_; }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd offset_;
};

// Planar serial chain with revolute joints. Maps the joint angles to the 2-D
// position of the distal end of link `point` (0-based). Joint angles are
// relative, so the absolute orientation of link i is q_0 + ... + q_i.
class PlanarArmFk : public DifferentiableMap {
 public:
  // point = -1 selects the end effector.
  PlanarArmFk(std::vector<double> lengths, int point = -1);

  std::string kind() const override { return "planar_arm_fk"; }
  int input_dim() const override { return static_cast<int>(lengths_.size()); }
  int output_dim() const override { return 2; }
  Eigen::VectorXd Value(const Eigen::VectorXd& q,
                        const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& q,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateJacobianBilinear(
      const Eigen::VectorXd& q, const Eigen::VectorXd& theta,
      const Eigen::VectorXd& u, const Eigen::VectorXd& v,
      Eigen::Ref<Eigen::VectorXd> xbar,
      Eigen::Ref<Eigen::VectorXd> grad) const override;

  const std::vector<double>& lengths() const { return lengths_; }
  int point() const { return point_; }

 private:
  std::vector<double> lengths_;
  int point_;  // always resolved to a link index
};

// x -> ||x - center||. Undefined within kDegenerateRadius of the center.
class DistanceToPoint : public DifferentiableMap {
 public:
  static constexpr double kDegenerateRadius = 1e-9;

  explicit DistanceToPoint(Eigen::VectorXd center);

  std::string kind() const override { return "distance_to_point"; }
  int input_dim() const override { return static_cast<int>(center_.size()); }
  int output_dim() const override { return 1; }
  Eigen::VectorXd Value(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateJacobianBilinear(
      const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
      const Eigen::VectorXd& u, const Eigen::VectorXd& v,
      Eigen::Ref<Eigen::VectorXd> xbar,
      Eigen::Ref<Eigen::VectorXd> grad) const override;

  const Eigen::VectorXd& center() const { return center_; }

 private:
  double Radius(const Eigen::VectorXd& x) const;

  Eigen::VectorXd center_;
};

}  // namespace tree_motion

#endif  // TREE_MOTION_MAPS_H_
