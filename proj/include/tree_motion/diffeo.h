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

#ifndef TREE_MOTION_DIFFEO_H_
#define TREE_MOTION_DIFFEO_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tree_motion/maps.h"
#include "tree_motion/param_vector.h"

namespace tree_motion {

// Random Fourier features for a Gaussian kernel with length scale l:
//   phi(x) = sqrt(2/D) [cos(alpha_i^T x + beta_i)]_{i=1..D},
// alpha_i ~ N(0, l^-2 I), beta_i ~ U[0, 2 pi). The frequencies and phases are
// drawn once at construction and never trained.
class RandomFourierFeatures {
 public:
  RandomFourierFeatures(int input_dim, int num_features, double length_scale,
                        std::uint64_t seed);
  // Explicit frequencies (num_features x input_dim) and phases.
  RandomFourierFeatures(Eigen::MatrixXd frequencies, Eigen::VectorXd phases);

  int input_dim() const { return static_cast<int>(frequencies_.cols()); }
  int num_features() const { return static_cast<int>(frequencies_.rows()); }
  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  const Eigen::VectorXd& phases() const { return phases_; }

  Eigen::VectorXd Features(const Eigen::VectorXd& x) const;

 private:
  friend class RffFunction;

  Eigen::MatrixXd frequencies_;
  Eigen::VectorXd phases_;
  double scale_;  // sqrt(2 / D)
};

// A vector-valued function linear in its weights over shared random Fourier
// features: f(x) = (phi(x) (x) I_k)^T theta. Weights are laid out feature-major,
// so theta[i * k + j] multiplies feature i in output j.
class RffFunction {
 public:
  RffFunction(std::shared_ptr<const RandomFourierFeatures> features,
              int output_dim);

  int input_dim() const { return features_->input_dim(); }
  int output_dim() const { return output_dim_; }
  int num_weights() const { return features_->num_features() * output_dim_; }

  Eigen::VectorXd Value(const Eigen::VectorXd& x,
                        const Eigen::Ref<const Eigen::VectorXd>& weights) const;
  // output_dim x input_dim.
  Eigen::MatrixXd Jacobian(
      const Eigen::VectorXd& x,
      const Eigen::Ref<const Eigen::VectorXd>& weights) const;
  // Sensitivities of w^T f(x).
  void AccumulateVjp(const Eigen::VectorXd& x,
                     const Eigen::Ref<const Eigen::VectorXd>& weights,
                     const Eigen::VectorXd& w, Eigen::Ref<Eigen::VectorXd> xbar,
                     Eigen::Ref<Eigen::VectorXd> weights_bar) const;
  // Sensitivities of w^T (df/dx) v.
  void AccumulateJacobianBilinear(
      const Eigen::VectorXd& x,
      const Eigen::Ref<const Eigen::VectorXd>& weights,
      const Eigen::VectorXd& w, const Eigen::VectorXd& v,
      Eigen::Ref<Eigen::VectorXd> xbar,
      Eigen::Ref<Eigen::VectorXd> weights_bar) const;

 private:
  std::shared_ptr<const RandomFourierFeatures> features_;
  int output_dim_;
};

// Affine coupling layer
//   y_a = x_a,  y_b = x_b * exp(s(x_a)) + t(x_a)
// on a split of n coordinates into floor(n/2) conditioning coordinates a and
// ceil(n/2) transformed coordinates b. Without `flipped` a is the leading
// block; with it a is the trailing block. Local parameters are [theta_s,
// theta_t], each RffFunction::num_weights() long.
class CouplingLayer {
 public:
  CouplingLayer(int dim, bool flipped,
                std::shared_ptr<const RandomFourierFeatures> features);

  int dim() const { return dim_; }
  bool flipped() const { return flipped_; }
  int num_params() const { return 2 * scale_.num_weights(); }
  const std::vector<int>& conditioning_indices() const { return a_; }
  const std::vector<int>& transformed_indices() const { return b_; }
  const RandomFourierFeatures& features() const { return *features_; }

  using ConstParams = Eigen::Ref<const Eigen::VectorXd>;
  using ParamsBar = Eigen::Ref<Eigen::VectorXd>;

  Eigen::VectorXd Forward(const Eigen::VectorXd& x, const ConstParams& p) const;
  Eigen::VectorXd Inverse(const Eigen::VectorXd& y, const ConstParams& p) const;
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& x,
                           const ConstParams& p) const;
  void AccumulateVjp(const Eigen::VectorXd& x, const ConstParams& p,
                     const Eigen::VectorXd& ybar,
                     Eigen::Ref<Eigen::VectorXd> xbar, ParamsBar pbar) const;
  void AccumulateJacobianBilinear(const Eigen::VectorXd& x,
                                  const ConstParams& p,
                                  const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v,
                                  Eigen::Ref<Eigen::VectorXd> xbar,
                                  ParamsBar pbar) const;
  // Sum of s(x_a); log |det J|.
  double LogAbsDet(const Eigen::VectorXd& x, const ConstParams& p) const;

 private:
  Eigen::VectorXd Gather(const Eigen::VectorXd& x,
                         const std::vector<int>& idx) const;

  int dim_;
  bool flipped_;
  std::vector<int> a_;
  std::vector<int> b_;
  std::shared_ptr<const RandomFourierFeatures> features_;
  RffFunction scale_;
  RffFunction translation_;
};

struct DiffeoChainOptions {
  int layers = 4;
  int num_features = 128;
  double length_scale = 1.0;
  std::uint64_t seed = 0;
};

// Chain of coupling layers psi_M o ... o psi_1 with alternating splits. A
// diffeomorphism of R^n for every parameter value; requires n >= 2.
class DiffeoChain : public DifferentiableMap {
 public:
  // Registers the chain's weights (initialized to zero, so the chain starts as
  // the identity) under `name`.
  DiffeoChain(int dim, const DiffeoChainOptions& options, ParamVector& params,
              const std::string& name, bool trainable);
  // Uses an already-registered slice.
  DiffeoChain(int dim, const DiffeoChainOptions& options, ParamSlice slice);

  static int NumParams(int dim, const DiffeoChainOptions& options);

  std::string kind() const override { return "diffeo_chain"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  ParamSlice param_slice() const override { return slice_; }
  const DiffeoChainOptions& options() const { return options_; }
  const std::vector<CouplingLayer>& layers() const { return layers_; }
  // Offset of layer i's parameters within the chain's slice.
  int layer_offset(int i) const { return layer_offsets_[i]; }

  Eigen::VectorXd Value(const Eigen::VectorXd& x,
                        const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta) const override;
  void AccumulateVjp(const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& ybar,
                     Eigen::Ref<Eigen::VectorXd> xbar,
                     Eigen::Ref<Eigen::VectorXd> grad) const override;
  void AccumulateJacobianBilinear(
      const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
      const Eigen::VectorXd& u, const Eigen::VectorXd& v,
      Eigen::Ref<Eigen::VectorXd> xbar,
      Eigen::Ref<Eigen::VectorXd> grad) const override;

  Eigen::VectorXd Inverse(const Eigen::VectorXd& y,
                          const Eigen::VectorXd& theta) const;
  double LogAbsDet(const Eigen::VectorXd& x,
                   const Eigen::VectorXd& theta) const;

 private:
  void Build();
  auto LayerParams(const Eigen::VectorXd& theta, int i) const {
    return theta.segment(slice_.offset + layer_offsets_[i],
                         layers_[i].num_params());
  }
  // Inputs y_0 .. y_{M-1} of every layer.
  std::vector<Eigen::VectorXd> LayerInputs(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& theta) const;

  int dim_;
  DiffeoChainOptions options_;
  ParamSlice slice_;
  std::vector<CouplingLayer> layers_;
  std::vector<int> layer_offsets_;
};

}  // namespace tree_motion

#endif  // TREE_MOTION_DIFFEO_H_
