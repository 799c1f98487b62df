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

#include "tree_motion/diffeo.h"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "tree_motion/errors.h"

namespace tree_motion {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMatrix> WeightMatrix(
    const Eigen::Ref<const Eigen::VectorXd>& weights, int rows, int cols) {
  return Eigen::Map<const RowMajorMatrix>(weights.data(), rows, cols);
}

Eigen::Map<RowMajorMatrix> WeightMatrix(Eigen::Ref<Eigen::VectorXd> weights,
                                        int rows, int cols) {
  return Eigen::Map<RowMajorMatrix>(weights.data(), rows, cols);
}

}  // namespace

RandomFourierFeatures::RandomFourierFeatures(int input_dim, int num_features,
                                             double length_scale,
                                             std::uint64_t seed) {
  if (input_dim <= 0 || num_features <= 0) {
    throw StructuralError("random Fourier features need positive dimensions");
  }
  if (!(length_scale > 0.0)) {
    throw StructuralError("random Fourier feature length scale must be > 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / length_scale);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
  frequencies_.resize(num_features, input_dim);
  phases_.resize(num_features);
  for (int i = 0; i < num_features; ++i) {
    for (int j = 0; j < input_dim; ++j) frequencies_(i, j) = normal(rng);
    phases_[i] = uniform(rng);
  }
  scale_ = std::sqrt(2.0 / num_features);
}

RandomFourierFeatures::RandomFourierFeatures(Eigen::MatrixXd frequencies,
                                             Eigen::VectorXd phases)
    : frequencies_(std::move(frequencies)), phases_(std::move(phases)) {
  if (frequencies_.rows() != phases_.size() || frequencies_.rows() == 0) {
    throw StructuralError("frequencies and phases disagree in feature count");
  }
  scale_ = std::sqrt(2.0 / static_cast<double>(frequencies_.rows()));
}

Eigen::VectorXd RandomFourierFeatures::Features(
    const Eigen::VectorXd& x) const {
  return scale_ * (frequencies_ * x + phases_).array().cos().matrix();
}

// ---------------------------------------------------------------------------

RffFunction::RffFunction(std::shared_ptr<const RandomFourierFeatures> features,
                         int output_dim)
    : features_(std::move(features)), output_dim_(output_dim) {}

Eigen::VectorXd RffFunction::Value(
    const Eigen::VectorXd& x,
    const Eigen::Ref<const Eigen::VectorXd>& weights) const {
  const auto theta =
      WeightMatrix(weights, features_->num_features(), output_dim_);
  return theta.transpose() * features_->Features(x);
}

Eigen::MatrixXd RffFunction::Jacobian(
    const Eigen::VectorXd& x,
    const Eigen::Ref<const Eigen::VectorXd>& weights) const {
  const auto theta =
      WeightMatrix(weights, features_->num_features(), output_dim_);
  const Eigen::ArrayXd slope =
      -features_->scale_ *
      (features_->frequencies_ * x + features_->phases_).array().sin();
  return theta.transpose() *
         (slope.matrix().asDiagonal() * features_->frequencies_);
}

void RffFunction::AccumulateVjp(
    const Eigen::VectorXd& x, const Eigen::Ref<const Eigen::VectorXd>& weights,
    const Eigen::VectorXd& w, Eigen::Ref<Eigen::VectorXd> xbar,
    Eigen::Ref<Eigen::VectorXd> weights_bar) const {
  const int d = features_->num_features();
  const auto theta = WeightMatrix(weights, d, output_dim_);
  const Eigen::ArrayXd angle =
      (features_->frequencies_ * x + features_->phases_).array();
  const Eigen::VectorXd projected = theta * w;  // theta_i . w
  xbar.noalias() += features_->frequencies_.transpose() *
                    (-features_->scale_ * angle.sin() * projected.array())
                        .matrix();
  auto theta_bar = WeightMatrix(weights_bar, d, output_dim_);
  theta_bar.noalias() +=
      (features_->scale_ * angle.cos()).matrix() * w.transpose();
}

void RffFunction::AccumulateJacobianBilinear(
    const Eigen::VectorXd& x, const Eigen::Ref<const Eigen::VectorXd>& weights,
    const Eigen::VectorXd& w, const Eigen::VectorXd& v,
    Eigen::Ref<Eigen::VectorXd> xbar,
    Eigen::Ref<Eigen::VectorXd> weights_bar) const {
  const int d = features_->num_features();
  const auto theta = WeightMatrix(weights, d, output_dim_);
  const Eigen::ArrayXd angle =
      (features_->frequencies_ * x + features_->phases_).array();
  const Eigen::ArrayXd projected = (theta * w).array();
  const Eigen::ArrayXd along_v = (features_->frequencies_ * v).array();
  // w^T J v = sum_i (theta_i . w) (-c sin a_i) (alpha_i . v)
  xbar.noalias() +=
      features_->frequencies_.transpose() *
      (-features_->scale_ * angle.cos() * projected * along_v).matrix();
  auto theta_bar = WeightMatrix(weights_bar, d, output_dim_);
  theta_bar.noalias() +=
      (-features_->scale_ * angle.sin() * along_v).matrix() * w.transpose();
}

// ---------------------------------------------------------------------------

CouplingLayer::CouplingLayer(
    int dim, bool flipped,
    std::shared_ptr<const RandomFourierFeatures> features)
    : dim_(dim),
      flipped_(flipped),
      features_(features),
      scale_(features, (dim + 1) / 2),
      translation_(features, (dim + 1) / 2) {
  if (dim < 2) {
    throw StructuralError("coupling layer needs dimension >= 2, got " +
                          std::to_string(dim));
  }
  const int na = dim / 2;
  if (features_->input_dim() != na) {
    throw StructuralError("coupling layer features have the wrong input size");
  }
  for (int i = 0; i < dim; ++i) {
    const bool conditioning = flipped ? i >= dim - na : i < na;
    (conditioning ? a_ : b_).push_back(i);
  }
}

Eigen::VectorXd CouplingLayer::Gather(const Eigen::VectorXd& x,
                                      const std::vector<int>& idx) const {
  Eigen::VectorXd out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

Eigen::VectorXd CouplingLayer::Forward(const Eigen::VectorXd& x,
                                       const ConstParams& p) const {
  const int nw = scale_.num_weights();
  const Eigen::VectorXd xa = Gather(x, a_);
  const Eigen::VectorXd s = scale_.Value(xa, p.head(nw));
  const Eigen::VectorXd t = translation_.Value(xa, p.tail(nw));
  Eigen::VectorXd y = x;
  for (size_t j = 0; j < b_.size(); ++j) {
    y[b_[j]] = x[b_[j]] * std::exp(s[j]) + t[j];
  }
  return y;
}

Eigen::VectorXd CouplingLayer::Inverse(const Eigen::VectorXd& y,
                                       const ConstParams& p) const {
  const int nw = scale_.num_weights();
  const Eigen::VectorXd ya = Gather(y, a_);
  const Eigen::VectorXd s = scale_.Value(ya, p.head(nw));
  const Eigen::VectorXd t = translation_.Value(ya, p.tail(nw));
  Eigen::VectorXd x = y;
  for (size_t j = 0; j < b_.size(); ++j) {
    x[b_[j]] = (y[b_[j]] - t[j]) * std::exp(-s[j]);
  }
  return x;
}

Eigen::MatrixXd CouplingLayer::Jacobian(const Eigen::VectorXd& x,
                                        const ConstParams& p) const {
  const int nw = scale_.num_weights();
  const Eigen::VectorXd xa = Gather(x, a_);
  const Eigen::VectorXd xb = Gather(x, b_);
  const Eigen::VectorXd e = scale_.Value(xa, p.head(nw)).array().exp();
  const Eigen::MatrixXd ds = scale_.Jacobian(xa, p.head(nw));
  const Eigen::MatrixXd dt = translation_.Jacobian(xa, p.tail(nw));
  const Eigen::MatrixXd cross =
      (xb.array() * e.array()).matrix().asDiagonal() * ds + dt;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i : a_) jac(i, i) = 1.0;
  for (size_t j = 0; j < b_.size(); ++j) {
    jac(b_[j], b_[j]) = e[j];
    for (size_t k = 0; k < a_.size(); ++k) jac(b_[j], a_[k]) = cross(j, k);
  }
  return jac;
}

void CouplingLayer::AccumulateVjp(const Eigen::VectorXd& x,
                                  const ConstParams& p,
                                  const Eigen::VectorXd& ybar,
                                  Eigen::Ref<Eigen::VectorXd> xbar,
                                  ParamsBar pbar) const {
  const int nw = scale_.num_weights();
  const Eigen::VectorXd xa = Gather(x, a_);
  const Eigen::VectorXd xb = Gather(x, b_);
  const Eigen::VectorXd ybar_b = Gather(ybar, b_);
  const Eigen::VectorXd e = scale_.Value(xa, p.head(nw)).array().exp();

  Eigen::VectorXd xa_bar = Gather(ybar, a_);
  const Eigen::VectorXd s_bar = (ybar_b.array() * xb.array() * e.array());
  scale_.AccumulateVjp(xa, p.head(nw), s_bar, xa_bar, pbar.head(nw));
  translation_.AccumulateVjp(xa, p.tail(nw), ybar_b, xa_bar, pbar.tail(nw));
  for (size_t k = 0; k < a_.size(); ++k) xbar[a_[k]] += xa_bar[k];
  for (size_t j = 0; j < b_.size(); ++j) xbar[b_[j]] += ybar_b[j] * e[j];
}

void CouplingLayer::AccumulateJacobianBilinear(
    const Eigen::VectorXd& x, const ConstParams& p, const Eigen::VectorXd& u,
    const Eigen::VectorXd& v, Eigen::Ref<Eigen::VectorXd> xbar,
    ParamsBar pbar) const {
  // u^T J v = u_a.v_a + sum_j u_j [e_j v_bj + x_bj e_j sigma_j + tau_j] with
  // sigma = ds/dx_a v_a, tau = dt/dx_a v_a, e = exp(s).
  const int nw = scale_.num_weights();
  const Eigen::VectorXd xa = Gather(x, a_);
  const Eigen::VectorXd xb = Gather(x, b_);
  const Eigen::VectorXd ub = Gather(u, b_);
  const Eigen::VectorXd va = Gather(v, a_);
  const Eigen::VectorXd vb = Gather(v, b_);
  const Eigen::ArrayXd e = scale_.Value(xa, p.head(nw)).array().exp();
  const Eigen::ArrayXd sigma =
      (scale_.Jacobian(xa, p.head(nw)) * va).array();

  const Eigen::VectorXd s_bar =
      (ub.array() * e * (vb.array() + xb.array() * sigma)).matrix();
  const Eigen::VectorXd sigma_bar = (ub.array() * xb.array() * e).matrix();

  Eigen::VectorXd xa_bar = Eigen::VectorXd::Zero(a_.size());
  scale_.AccumulateVjp(xa, p.head(nw), s_bar, xa_bar, pbar.head(nw));
  scale_.AccumulateJacobianBilinear(xa, p.head(nw), sigma_bar, va, xa_bar,
                                    pbar.head(nw));
  translation_.AccumulateJacobianBilinear(xa, p.tail(nw), ub, va, xa_bar,
                                          pbar.tail(nw));
  for (size_t k = 0; k < a_.size(); ++k) xbar[a_[k]] += xa_bar[k];
  for (size_t j = 0; j < b_.size(); ++j) {
    xbar[b_[j]] += ub[j] * e[j] * sigma[j];
  }
}

double CouplingLayer::LogAbsDet(const Eigen::VectorXd& x,
                                const ConstParams& p) const {
  return scale_.Value(Gather(x, a_), p.head(scale_.num_weights())).sum();
}

// ---------------------------------------------------------------------------

DiffeoChain::DiffeoChain(int dim, const DiffeoChainOptions& options,
                         ParamVector& params, const std::string& name,
                         bool trainable)
    : dim_(dim), options_(options) {
  Build();
  slice_ = params.Register(name, Eigen::VectorXd::Zero(NumParams(dim, options)),
                           trainable);
}

DiffeoChain::DiffeoChain(int dim, const DiffeoChainOptions& options,
                         ParamSlice slice)
    : dim_(dim), options_(options), slice_(slice) {
  Build();
  if (slice_.length != NumParams(dim, options)) {
    throw StructuralError("diffeo chain parameter slice has the wrong length");
  }
}

int DiffeoChain::NumParams(int dim, const DiffeoChainOptions& options) {
  return options.layers * 2 * options.num_features * ((dim + 1) / 2);
}

void DiffeoChain::Build() {
  if (dim_ < 2) {
    throw StructuralError(
        "diffeo_chain requires dimension >= 2 (a 1-D split is impossible)");
  }
  if (options_.layers < 1) {
    throw StructuralError("diffeo_chain needs at least one layer");
  }
  std::mt19937_64 seeder(options_.seed);
  int offset = 0;
  for (int i = 0; i < options_.layers; ++i) {
    auto features = std::make_shared<const RandomFourierFeatures>(
        dim_ / 2, options_.num_features, options_.length_scale, seeder());
    layers_.emplace_back(dim_, i % 2 == 1, std::move(features));
    layer_offsets_.push_back(offset);
    offset += layers_.back().num_params();
  }
}

std::vector<Eigen::VectorXd> DiffeoChain::LayerInputs(
    const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const {
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(layers_.size());
  Eigen::VectorXd y = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    inputs.push_back(y);
    y = layers_[i].Forward(y, LayerParams(theta, i));
  }
  return inputs;
}

Eigen::VectorXd DiffeoChain::Value(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& theta) const {
  Eigen::VectorXd y = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    y = layers_[i].Forward(y, LayerParams(theta, i));
  }
  return y;
}

Eigen::VectorXd DiffeoChain::Inverse(const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& theta) const {
  Eigen::VectorXd x = y;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    x = layers_[i].Inverse(x, LayerParams(theta, i));
  }
  return x;
}

Eigen::MatrixXd DiffeoChain::Jacobian(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(dim_, dim_);
  Eigen::VectorXd y = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    jac = layers_[i].Jacobian(y, LayerParams(theta, i)) * jac;
    y = layers_[i].Forward(y, LayerParams(theta, i));
  }
  return jac;
}

double DiffeoChain::LogAbsDet(const Eigen::VectorXd& x,
                              const Eigen::VectorXd& theta) const {
  double total = 0.0;
  Eigen::VectorXd y = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    total += layers_[i].LogAbsDet(y, LayerParams(theta, i));
    y = layers_[i].Forward(y, LayerParams(theta, i));
  }
  return total;
}

void DiffeoChain::AccumulateVjp(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& theta,
                                const Eigen::VectorXd& ybar,
                                Eigen::Ref<Eigen::VectorXd> xbar,
                                Eigen::Ref<Eigen::VectorXd> grad) const {
  const std::vector<Eigen::VectorXd> inputs = LayerInputs(x, theta);
  Eigen::VectorXd bar = ybar;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(dim_);
    layers_[i].AccumulateVjp(
        inputs[i], LayerParams(theta, i), bar, prev,
        grad.segment(slice_.offset + layer_offsets_[i],
                     layers_[i].num_params()));
    bar = std::move(prev);
  }
  xbar += bar;
}

void DiffeoChain::AccumulateJacobianBilinear(
    const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
    const Eigen::VectorXd& u, const Eigen::VectorXd& v,
    Eigen::Ref<Eigen::VectorXd> xbar, Eigen::Ref<Eigen::VectorXd> grad) const {
  // u^T J_M ... J_1 v. Push v forward through the layers, then sweep back with
  // u pulled through each layer Jacobian and the state adjoint.
  const int m = static_cast<int>(layers_.size());
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> tangents;
  std::vector<Eigen::MatrixXd> jacobians;
  Eigen::VectorXd y = x;
  Eigen::VectorXd tangent = v;
  for (int i = 0; i < m; ++i) {
    const auto p = LayerParams(theta, i);
    inputs.push_back(y);
    tangents.push_back(tangent);
    jacobians.push_back(layers_[i].Jacobian(y, p));
    tangent = jacobians.back() * tangent;
    y = layers_[i].Forward(y, p);
  }
  Eigen::VectorXd cotangent = u;
  Eigen::VectorXd state_bar = Eigen::VectorXd::Zero(dim_);
  for (int i = m - 1; i >= 0; --i) {
    const auto p = LayerParams(theta, i);
    auto layer_grad = grad.segment(slice_.offset + layer_offsets_[i],
                                   layers_[i].num_params());
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(dim_);
    layers_[i].AccumulateVjp(inputs[i], p, state_bar, prev, layer_grad);
    layers_[i].AccumulateJacobianBilinear(inputs[i], p, cotangent,
                                          tangents[i], prev, layer_grad);
    cotangent = jacobians[i].transpose() * cotangent;
    state_bar = std::move(prev);
  }
  xbar += state_bar;
}

}  // namespace tree_motion
