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

#ifndef TREE_MOTION_POLICIES_H_
#define TREE_MOTION_POLICIES_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tree_motion/maps.h"
#include "tree_motion/param_vector.h"

namespace tree_motion {

// ---------------------------------------------------------------------------
// Importance-weight (metric) models.

class MetricModel {
 public:
  virtual ~MetricModel() = default;
  virtual std::string kind() const = 0;
  virtual int dim() const = 0;
  virtual ParamSlice param_slice() const { return {}; }

  virtual Eigen::MatrixXd Evaluate(const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& theta) const = 0;
  // Sensitivities of <G, M(z; theta)> (Frobenius product).
  virtual void AccumulateGrad(const Eigen::VectorXd& z,
                              const Eigen::VectorXd& theta,
                              const Eigen::MatrixXd& g,
                              Eigen::Ref<Eigen::VectorXd> zbar,
                              Eigen::Ref<Eigen::VectorXd> grad) const = 0;
};

class ConstantMetric : public MetricModel {
 public:
  // `matrix` must be symmetric positive definite.
  explicit ConstantMetric(Eigen::MatrixXd matrix);
  static std::shared_ptr<ConstantMetric> Scaled(int dim, double weight);

  std::string kind() const override { return "constant"; }
  int dim() const override { return static_cast<int>(matrix_.rows()); }
  Eigen::MatrixXd Evaluate(const Eigen::VectorXd&,
                           const Eigen::VectorXd&) const override {
    return matrix_;
  }
  void AccumulateGrad(const Eigen::VectorXd&, const Eigen::VectorXd&,
                      const Eigen::MatrixXd&, Eigen::Ref<Eigen::VectorXd>,
                      Eigen::Ref<Eigen::VectorXd>) const override {}

  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;
};

struct CholeskyNetOptions {
  std::vector<int> hidden = {64, 64};
  double epsilon = 1e-4;
  // Scale of the uniform He-style initialization; 0 gives all-zero weights.
  double init_scale = 1.0;
  std::uint64_t seed = 0;
};

// M(w) = L(w) L(w)^T where L is lower triangular with diagonal |l_d(w)| + eps
// and strictly-lower entries l_o(w), listed row by row. l_d and l_o are linear
// heads on a shared fully-connected ReLU trunk.
//
// Parameter layout: for every hidden layer W (row-major, out x in) then b;
// then the diagonal head W_d, b_d; then the off-diagonal head W_o, b_o.
class CholeskyMetricNet : public MetricModel {
 public:
  CholeskyMetricNet(int dim, const CholeskyNetOptions& options,
                    ParamVector& params, const std::string& name,
                    bool trainable);
  CholeskyMetricNet(int dim, const CholeskyNetOptions& options,
                    ParamSlice slice);

  static int NumParams(int dim, const std::vector<int>& hidden);
  // Seeded initial weights (biases zero).
  static Eigen::VectorXd InitialParams(int dim,
                                       const CholeskyNetOptions& options);

  std::string kind() const override { return "cholesky_net"; }
  int dim() const override { return dim_; }
  ParamSlice param_slice() const override { return slice_; }
  const CholeskyNetOptions& options() const { return options_; }

  struct Output {
    Eigen::VectorXd raw_diagonal;
    Eigen::VectorXd raw_off_diagonal;
    Eigen::MatrixXd lower;   // L
    Eigen::MatrixXd metric;  // L L^T
  };
  Output Forward(const Eigen::VectorXd& w, const Eigen::VectorXd& theta) const;

  Eigen::MatrixXd Evaluate(const Eigen::VectorXd& w,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateGrad(const Eigen::VectorXd& w, const Eigen::VectorXd& theta,
                      const Eigen::MatrixXd& g,
                      Eigen::Ref<Eigen::VectorXd> wbar,
                      Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    int offset = 0;  // of W within the slice; b follows W
  };
  void Build();

  int dim_;
  CholeskyNetOptions options_;
  ParamSlice slice_;
  std::vector<Layer> layers_;  // hidden..., diagonal head, off-diagonal head
};

// Scalar weight for a 1-D barrier leaf that grows as the distance z -> 0:
//   M(z) = weight (1 + (max(0, d0 - z) / z)^2).
class BarrierMetric : public MetricModel {
 public:
  BarrierMetric(double margin, double weight);

  std::string kind() const override { return "barrier"; }
  int dim() const override { return 1; }
  Eigen::MatrixXd Evaluate(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateGrad(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                      const Eigen::MatrixXd& g,
                      Eigen::Ref<Eigen::VectorXd> zbar,
                      Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  double margin_;
  double weight_;
};

// ---------------------------------------------------------------------------
// Potentials. The leaf force is -grad Phi.

class Potential {
 public:
  virtual ~Potential() = default;
  virtual std::string kind() const = 0;
  virtual int dim() const = 0;

  virtual double Value(const Eigen::VectorXd& z,
                       const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd Gradient(const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& theta) const = 0;
  // Sensitivities of a^T (-grad Phi(z; theta)).
  virtual void AccumulateForceGrad(const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& a,
                                   Eigen::Ref<Eigen::VectorXd> zbar,
                                   Eigen::Ref<Eigen::VectorXd> grad) const = 0;
};

// Phi = 0
class ZeroPotential : public Potential {
 public:
  explicit ZeroPotential(int dim) : dim_(dim) {}
  std::string kind() const override { return "none"; }
  int dim() const override { return dim_; }
  double Value(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
    return 0.0;
  }
  Eigen::VectorXd Gradient(const Eigen::VectorXd&,
                           const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Zero(dim_);
  }
  void AccumulateForceGrad(const Eigen::VectorXd&, const Eigen::VectorXd&,
                           const Eigen::VectorXd&, Eigen::Ref<Eigen::VectorXd>,
                           Eigen::Ref<Eigen::VectorXd>) const override {}

 private:
  int dim_;
};

// Phi = 0.5 gain ||z - g||^2. The goal g is either fixed or read from a
// learnable parameter slice.
class QuadraticPotential : public Potential {
 public:
  QuadraticPotential(Eigen::VectorXd goal, double gain);
  QuadraticPotential(Eigen::VectorXd goal, double gain, ParamVector& params,
                     const std::string& name, bool trainable);
  QuadraticPotential(int dim, double gain, ParamSlice goal_slice);

  std::string kind() const override { return "quadratic"; }
  int dim() const override { return dim_; }
  double gain() const { return gain_; }
  ParamSlice goal_slice() const { return goal_slice_; }
  Eigen::VectorXd Goal(const Eigen::VectorXd& theta) const;

  double Value(const Eigen::VectorXd& z,
               const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateForceGrad(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& a,
                           Eigen::Ref<Eigen::VectorXd> zbar,
                           Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  int dim_;
  Eigen::VectorXd goal_;
  double gain_;
  ParamSlice goal_slice_;
};

// Potential on a latent node w = phi(z) reached from the subtask node through
// `latent_map`: Phi(w) = 0.5 ||w - phi(z*)||^2, with z* given in subtask
// coordinates. The latent goal moves with the map's parameters.
class LatentQuadraticPotential : public Potential {
 public:
  LatentQuadraticPotential(Eigen::VectorXd subtask_goal,
                           std::shared_ptr<const DifferentiableMap> latent_map);

  std::string kind() const override { return "latent_quadratic"; }
  int dim() const override { return latent_map_->output_dim(); }
  const Eigen::VectorXd& subtask_goal() const { return subtask_goal_; }
  Eigen::VectorXd LatentGoal(const Eigen::VectorXd& theta) const;

  double Value(const Eigen::VectorXd& w,
               const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& w,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateForceGrad(const Eigen::VectorXd& w,
                           const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& a,
                           Eigen::Ref<Eigen::VectorXd> wbar,
                           Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  Eigen::VectorXd subtask_goal_;
  std::shared_ptr<const DifferentiableMap> latent_map_;
};

// Repulsive potential on a 1-D distance coordinate z > 0:
//   Phi(z) = gain max(0, d0 - z)^2 / z.
// Zero (and flat) for z >= d0, unbounded as z -> 0.
class BarrierPotential : public Potential {
 public:
  BarrierPotential(double margin, double gain);

  std::string kind() const override { return "barrier"; }
  int dim() const override { return 1; }
  double Value(const Eigen::VectorXd& z,
               const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateForceGrad(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& a,
                           Eigen::Ref<Eigen::VectorXd> zbar,
                           Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  double margin_;
  double gain_;
};

// ---------------------------------------------------------------------------
// Leaf policies.

struct LeafOutput {
  Eigen::VectorXd force;   // p = M v
  Eigen::MatrixXd metric;  // M
};

class LeafPolicy {
 public:
  enum class Kind { kNaturalGradient, kRawVm };

  virtual ~LeafPolicy() = default;
  virtual Kind kind() const = 0;
  virtual std::string description() const = 0;
  virtual int dim() const = 0;
  // True if any of the policy's own parameters (not counting a latent map it
  // reads) live in the parameter vector.
  virtual bool parameterized() const = 0;

  virtual LeafOutput Evaluate(const Eigen::VectorXd& z,
                              const Eigen::VectorXd& theta) const = 0;
  // Explicit velocity v; for natural-gradient leaves v = -M^{-1} grad Phi.
  virtual Eigen::VectorXd Velocity(const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& theta) const = 0;
  // Potential value, when the leaf is a gradient flow.
  virtual std::optional<double> PotentialValue(
      const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const = 0;

  // Sensitivities of S = a^T p(z) - a^T M(z) b with a, b fixed.
  virtual void AccumulateGrad(const Eigen::VectorXd& z,
                              const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b,
                              Eigen::Ref<Eigen::VectorXd> zbar,
                              Eigen::Ref<Eigen::VectorXd> grad) const = 0;
};

// Natural gradient flow v = -M^{-1} grad Phi. The force is -grad Phi, computed
// without forming M^{-1}.
class NaturalGradientLeaf : public LeafPolicy {
 public:
  NaturalGradientLeaf(std::shared_ptr<const Potential> potential,
                      std::shared_ptr<const MetricModel> metric);

  Kind kind() const override { return Kind::kNaturalGradient; }
  std::string description() const override;
  int dim() const override { return potential_->dim(); }
  bool parameterized() const override;
  const Potential& potential() const { return *potential_; }
  const MetricModel& metric() const { return *metric_; }

  LeafOutput Evaluate(const Eigen::VectorXd& z,
                      const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd Velocity(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& theta) const override;
  std::optional<double> PotentialValue(
      const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const override;
  void AccumulateGrad(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                      const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      Eigen::Ref<Eigen::VectorXd> zbar,
                      Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  std::shared_ptr<const Potential> potential_;
  std::shared_ptr<const MetricModel> metric_;
};

// Explicit (v, M) pair with a constant velocity, fixed or learnable.
class RawVmLeaf : public LeafPolicy {
 public:
  RawVmLeaf(Eigen::VectorXd velocity, std::shared_ptr<const MetricModel> metric);
  RawVmLeaf(Eigen::VectorXd velocity, std::shared_ptr<const MetricModel> metric,
            ParamVector& params, const std::string& name, bool trainable);
  RawVmLeaf(ParamSlice velocity_slice,
            std::shared_ptr<const MetricModel> metric);

  Kind kind() const override { return Kind::kRawVm; }
  std::string description() const override;
  int dim() const override { return metric_->dim(); }
  bool parameterized() const override;
  ParamSlice velocity_slice() const { return velocity_slice_; }
  const MetricModel& metric() const { return *metric_; }

  LeafOutput Evaluate(const Eigen::VectorXd& z,
                      const Eigen::VectorXd& theta) const override;
  Eigen::VectorXd Velocity(const Eigen::VectorXd& z,
                           const Eigen::VectorXd& theta) const override;
  // Zero for a fixed zero-velocity leaf (a damper is a gradient flow of the
  // zero potential); empty otherwise.
  std::optional<double> PotentialValue(
      const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const override;
  void AccumulateGrad(const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                      const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                      Eigen::Ref<Eigen::VectorXd> zbar,
                      Eigen::Ref<Eigen::VectorXd> grad) const override;

 private:
  Eigen::VectorXd velocity_;
  ParamSlice velocity_slice_;
  std::shared_ptr<const MetricModel> metric_;
};

// Hand-designed leaves.

// v = 0, M = c I.
std::shared_ptr<LeafPolicy> MakeDamper(int dim, double gain);
// Per-coordinate gains.
std::shared_ptr<LeafPolicy> MakeDamper(const Eigen::VectorXd& gains);
// Phi = 0.5 gain ||z - goal||^2, M = weight I.
std::shared_ptr<LeafPolicy> MakeAttractor(Eigen::VectorXd goal, double gain,
                                          double weight);
// BarrierPotential with a BarrierMetric, on a 1-D distance leaf.
std::shared_ptr<LeafPolicy> MakeBarrier(double margin, double gain,
                                        double weight);

}  // namespace tree_motion

#endif  // TREE_MOTION_POLICIES_H_
