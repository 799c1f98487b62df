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

#include "tree_motion/policies.h"

#include <cmath>
#include <random>
#include <sstream>
#include <utility>

#include "tree_motion/errors.h"

namespace tree_motion {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double Sign(double x) { return (x > 0.0) - (x < 0.0); }

void RequirePositiveDistance(double z, const char* what) {
  if (!(z > 0.0)) {
    std::ostringstream msg;
    msg << what << " evaluated at distance " << z << " (must be > 0)";
    throw DomainError(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ConstantMetric::ConstantMetric(Eigen::MatrixXd matrix)
    : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols()) {
    throw StructuralError("constant metric must be a non-empty square matrix");
  }
  if (!matrix_.isApprox(matrix_.transpose(), 1e-12)) {
    throw StructuralError("constant metric must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(matrix_);
  if (llt.info() != Eigen::Success) {
    throw StructuralError("constant metric must be positive definite");
  }
}

std::shared_ptr<ConstantMetric> ConstantMetric::Scaled(int dim, double weight) {
  return std::make_shared<ConstantMetric>(weight *
                                          Eigen::MatrixXd::Identity(dim, dim));
}

// ---------------------------------------------------------------------------

CholeskyMetricNet::CholeskyMetricNet(int dim, const CholeskyNetOptions& options,
                                     ParamVector& params,
                                     const std::string& name, bool trainable)
    : dim_(dim), options_(options) {
  Build();
  slice_ = params.Register(name, InitialParams(dim, options), trainable);
}

CholeskyMetricNet::CholeskyMetricNet(int dim, const CholeskyNetOptions& options,
                                     ParamSlice slice)
    : dim_(dim), options_(options), slice_(slice) {
  Build();
  if (slice_.length != NumParams(dim, options.hidden)) {
    throw StructuralError("cholesky_net parameter slice has the wrong length");
  }
}

int CholeskyMetricNet::NumParams(int dim, const std::vector<int>& hidden) {
  int total = 0;
  int in = dim;
  for (int width : hidden) {
    total += width * in + width;
    in = width;
  }
  const int off = dim * (dim - 1) / 2;
  return total + dim * in + dim + off * in + off;
}

void CholeskyMetricNet::Build() {
  if (dim_ <= 0) throw StructuralError("cholesky_net needs a positive dimension");
  if (!(options_.epsilon > 0.0)) {
    throw StructuralError("cholesky_net epsilon must be > 0");
  }
  int in = dim_;
  int offset = 0;
  for (int width : options_.hidden) {
    if (width <= 0) throw StructuralError("cholesky_net hidden widths must be > 0");
    layers_.push_back({in, width, offset});
    offset += width * in + width;
    in = width;
  }
  layers_.push_back({in, dim_, offset});
  offset += dim_ * in + dim_;
  layers_.push_back({in, dim_ * (dim_ - 1) / 2, offset});
}

Eigen::VectorXd CholeskyMetricNet::InitialParams(
    int dim, const CholeskyNetOptions& options) {
  Eigen::VectorXd values =
      Eigen::VectorXd::Zero(NumParams(dim, options.hidden));
  std::mt19937_64 rng(options.seed);
  int in = dim;
  int offset = 0;
  auto fill = [&](int rows, int cols, double bound) {
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (int i = 0; i < rows * cols; ++i) values[offset + i] = uniform(rng);
    offset += rows * cols + rows;  // biases stay zero
  };
  for (int width : options.hidden) {
    fill(width, in, options.init_scale * std::sqrt(6.0 / in));
    in = width;
  }
  const int diag_bias = offset + dim * in;
  fill(dim, in, options.init_scale * std::sqrt(3.0 / in));
  fill(dim * (dim - 1) / 2, in, options.init_scale * std::sqrt(3.0 / in));
  // Start near L = I so a fresh leaf carries unit weight.
  if (options.init_scale > 0.0) values.segment(diag_bias, dim).setOnes();
  return values;
}

CholeskyMetricNet::Output CholeskyMetricNet::Forward(
    const Eigen::VectorXd& w, const Eigen::VectorXd& theta) const {
  const auto p = theta.segment(slice_.offset, slice_.length);
  auto affine = [&](const Layer& layer, const Eigen::VectorXd& x) {
    Eigen::Map<const RowMajorMatrix> weights(p.data() + layer.offset,
                                             layer.out, layer.in);
    return Eigen::VectorXd(weights * x +
                           p.segment(layer.offset + layer.out * layer.in,
                                     layer.out));
  };
  Eigen::VectorXd h = w;
  const size_t hidden = layers_.size() - 2;
  for (size_t i = 0; i < hidden; ++i) h = affine(layers_[i], h).cwiseMax(0.0);

  Output out;
  out.raw_diagonal = affine(layers_[hidden], h);
  out.raw_off_diagonal = affine(layers_[hidden + 1], h);
  out.lower = Eigen::MatrixXd::Zero(dim_, dim_);
  int k = 0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < i; ++j) out.lower(i, j) = out.raw_off_diagonal[k++];
    out.lower(i, i) = std::abs(out.raw_diagonal[i]) + options_.epsilon;
  }
  out.metric = out.lower * out.lower.transpose();
  return out;
}

Eigen::MatrixXd CholeskyMetricNet::Evaluate(
    const Eigen::VectorXd& w, const Eigen::VectorXd& theta) const {
  return Forward(w, theta).metric;
}

void CholeskyMetricNet::AccumulateGrad(const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& theta,
                                       const Eigen::MatrixXd& g,
                                       Eigen::Ref<Eigen::VectorXd> wbar,
                                       Eigen::Ref<Eigen::VectorXd> grad) const {
  const auto p = theta.segment(slice_.offset, slice_.length);
  auto pbar = grad.segment(slice_.offset, slice_.length);

  // Replay the trunk, keeping pre-activations.
  const size_t hidden = layers_.size() - 2;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> pre;
  Eigen::VectorXd h = w;
  for (size_t i = 0; i < hidden; ++i) {
    const Layer& layer = layers_[i];
    Eigen::Map<const RowMajorMatrix> weights(p.data() + layer.offset,
                                             layer.out, layer.in);
    inputs.push_back(h);
    pre.push_back(weights * h +
                  p.segment(layer.offset + layer.out * layer.in, layer.out));
    h = pre.back().cwiseMax(0.0);
  }
  const Output out = Forward(w, theta);

  // d<G, L L^T> / dL = (G + G^T) L, lower triangle only.
  const Eigen::MatrixXd g_lower = (g + g.transpose()) * out.lower;
  Eigen::VectorXd diag_bar(dim_);
  Eigen::VectorXd off_bar(dim_ * (dim_ - 1) / 2);
  int k = 0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < i; ++j) off_bar[k++] = g_lower(i, j);
    diag_bar[i] = g_lower(i, i) * Sign(out.raw_diagonal[i]);
  }

  auto backprop_affine = [&](const Layer& layer, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& out_bar,
                             Eigen::VectorXd& x_bar) {
    Eigen::Map<const RowMajorMatrix> weights(p.data() + layer.offset,
                                             layer.out, layer.in);
    Eigen::Map<RowMajorMatrix> weights_bar(pbar.data() + layer.offset,
                                           layer.out, layer.in);
    weights_bar.noalias() += out_bar * x.transpose();
    pbar.segment(layer.offset + layer.out * layer.in, layer.out) += out_bar;
    x_bar.noalias() += weights.transpose() * out_bar;
  };

  Eigen::VectorXd h_bar = Eigen::VectorXd::Zero(h.size());
  backprop_affine(layers_[hidden], h, diag_bar, h_bar);
  backprop_affine(layers_[hidden + 1], h, off_bar, h_bar);
  for (int i = static_cast<int>(hidden) - 1; i >= 0; --i) {
    const Eigen::VectorXd pre_bar =
        (pre[i].array() > 0.0).select(h_bar, 0.0);
    Eigen::VectorXd in_bar = Eigen::VectorXd::Zero(inputs[i].size());
    backprop_affine(layers_[i], inputs[i], pre_bar, in_bar);
    h_bar = std::move(in_bar);
  }
  wbar += h_bar;
}

// ---------------------------------------------------------------------------

BarrierMetric::BarrierMetric(double margin, double weight)
    : margin_(margin), weight_(weight) {
  if (!(margin > 0.0) || !(weight > 0.0)) {
    throw StructuralError("barrier metric needs margin > 0 and weight > 0");
  }
}

Eigen::MatrixXd BarrierMetric::Evaluate(const Eigen::VectorXd& z,
                                        const Eigen::VectorXd&) const {
  RequirePositiveDistance(z[0], "barrier metric");
  const double ratio = std::max(0.0, margin_ - z[0]) / z[0];
  return Eigen::MatrixXd::Constant(1, 1, weight_ * (1.0 + ratio * ratio));
}

void BarrierMetric::AccumulateGrad(const Eigen::VectorXd& z,
                                   const Eigen::VectorXd&,
                                   const Eigen::MatrixXd& g,
                                   Eigen::Ref<Eigen::VectorXd> zbar,
                                   Eigen::Ref<Eigen::VectorXd>) const {
  RequirePositiveDistance(z[0], "barrier metric");
  if (z[0] >= margin_) return;
  const double ratio = margin_ / z[0] - 1.0;
  zbar[0] += g(0, 0) * (-2.0 * weight_ * ratio * margin_ / (z[0] * z[0]));
}

// ---------------------------------------------------------------------------

QuadraticPotential::QuadraticPotential(Eigen::VectorXd goal, double gain)
    : dim_(static_cast<int>(goal.size())), goal_(std::move(goal)), gain_(gain) {
  if (dim_ == 0) throw StructuralError("quadratic potential goal is empty");
  if (!(gain > 0.0)) throw StructuralError("quadratic potential gain must be > 0");
}

QuadraticPotential::QuadraticPotential(Eigen::VectorXd goal, double gain,
                                       ParamVector& params,
                                       const std::string& name, bool trainable)
    : QuadraticPotential(goal, gain) {
  goal_slice_ = params.Register(name, goal, trainable);
}

QuadraticPotential::QuadraticPotential(int dim, double gain,
                                       ParamSlice goal_slice)
    : dim_(dim), goal_(Eigen::VectorXd::Zero(dim)), gain_(gain),
      goal_slice_(goal_slice) {
  if (goal_slice.length != dim) {
    throw StructuralError("quadratic potential goal slice has the wrong length");
  }
}

Eigen::VectorXd QuadraticPotential::Goal(const Eigen::VectorXd& theta) const {
  if (goal_slice_.empty()) return goal_;
  return theta.segment(goal_slice_.offset, goal_slice_.length);
}

double QuadraticPotential::Value(const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& theta) const {
  return 0.5 * gain_ * (z - Goal(theta)).squaredNorm();
}

Eigen::VectorXd QuadraticPotential::Gradient(
    const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const {
  return gain_ * (z - Goal(theta));
}

void QuadraticPotential::AccumulateForceGrad(
    const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd& a,
    Eigen::Ref<Eigen::VectorXd> zbar, Eigen::Ref<Eigen::VectorXd> grad) const {
  zbar -= gain_ * a;
  if (!goal_slice_.empty()) {
    grad.segment(goal_slice_.offset, goal_slice_.length) += gain_ * a;
  }
}

// ---------------------------------------------------------------------------

LatentQuadraticPotential::LatentQuadraticPotential(
    Eigen::VectorXd subtask_goal,
    std::shared_ptr<const DifferentiableMap> latent_map)
    : subtask_goal_(std::move(subtask_goal)),
      latent_map_(std::move(latent_map)) {
  if (!latent_map_) throw StructuralError("latent potential needs a map");
  if (subtask_goal_.size() != latent_map_->input_dim()) {
    throw StructuralError("latent potential goal has the wrong dimension");
  }
}

Eigen::VectorXd LatentQuadraticPotential::LatentGoal(
    const Eigen::VectorXd& theta) const {
  return latent_map_->Value(subtask_goal_, theta);
}

double LatentQuadraticPotential::Value(const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& theta) const {
  return 0.5 * (w - LatentGoal(theta)).squaredNorm();
}

Eigen::VectorXd LatentQuadraticPotential::Gradient(
    const Eigen::VectorXd& w, const Eigen::VectorXd& theta) const {
  return w - LatentGoal(theta);
}

void LatentQuadraticPotential::AccumulateForceGrad(
    const Eigen::VectorXd&, const Eigen::VectorXd& theta,
    const Eigen::VectorXd& a, Eigen::Ref<Eigen::VectorXd> wbar,
    Eigen::Ref<Eigen::VectorXd> grad) const {
  wbar -= a;
  if (latent_map_->parameterized()) {
    // a^T (phi(z*) - w): the latent goal moves with the map parameters.
    Eigen::VectorXd goal_bar = Eigen::VectorXd::Zero(subtask_goal_.size());
    latent_map_->AccumulateVjp(subtask_goal_, theta, a, goal_bar, grad);
  }
}

// ---------------------------------------------------------------------------

BarrierPotential::BarrierPotential(double margin, double gain)
    : margin_(margin), gain_(gain) {
  if (!(margin > 0.0) || !(gain > 0.0)) {
    throw StructuralError("barrier potential needs margin > 0 and gain > 0");
  }
}

double BarrierPotential::Value(const Eigen::VectorXd& z,
                               const Eigen::VectorXd&) const {
  RequirePositiveDistance(z[0], "barrier potential");
  const double gap = std::max(0.0, margin_ - z[0]);
  return gain_ * gap * gap / z[0];
}

Eigen::VectorXd BarrierPotential::Gradient(const Eigen::VectorXd& z,
                                           const Eigen::VectorXd&) const {
  RequirePositiveDistance(z[0], "barrier potential");
  if (z[0] >= margin_) return Eigen::VectorXd::Zero(1);
  // d/dz gain (d0 - z)^2 / z = gain (1 - d0^2 / z^2)
  const double ratio = margin_ / z[0];
  return Eigen::VectorXd::Constant(1, gain_ * (1.0 - ratio * ratio));
}

void BarrierPotential::AccumulateForceGrad(
    const Eigen::VectorXd& z, const Eigen::VectorXd&, const Eigen::VectorXd& a,
    Eigen::Ref<Eigen::VectorXd> zbar, Eigen::Ref<Eigen::VectorXd>) const {
  RequirePositiveDistance(z[0], "barrier potential");
  if (z[0] >= margin_) return;
  const double curvature = 2.0 * gain_ * margin_ * margin_ / std::pow(z[0], 3);
  zbar[0] -= a[0] * curvature;
}

// ---------------------------------------------------------------------------

NaturalGradientLeaf::NaturalGradientLeaf(
    std::shared_ptr<const Potential> potential,
    std::shared_ptr<const MetricModel> metric)
    : potential_(std::move(potential)), metric_(std::move(metric)) {
  if (!potential_ || !metric_) {
    throw StructuralError("natural-gradient leaf needs a potential and metric");
  }
  if (potential_->dim() != metric_->dim()) {
    throw StructuralError("natural-gradient leaf potential dimension " +
                          std::to_string(potential_->dim()) +
                          " != metric dimension " +
                          std::to_string(metric_->dim()));
  }
}

std::string NaturalGradientLeaf::description() const {
  return "natural_gradient(" + potential_->kind() + ", " + metric_->kind() + ")";
}

bool NaturalGradientLeaf::parameterized() const {
  const auto* quadratic =
      dynamic_cast<const QuadraticPotential*>(potential_.get());
  return !metric_->param_slice().empty() ||
         (quadratic != nullptr && !quadratic->goal_slice().empty());
}

LeafOutput NaturalGradientLeaf::Evaluate(const Eigen::VectorXd& z,
                                         const Eigen::VectorXd& theta) const {
  return {-potential_->Gradient(z, theta), metric_->Evaluate(z, theta)};
}

Eigen::VectorXd NaturalGradientLeaf::Velocity(
    const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const {
  const LeafOutput out = Evaluate(z, theta);
  return out.metric.llt().solve(out.force);
}

std::optional<double> NaturalGradientLeaf::PotentialValue(
    const Eigen::VectorXd& z, const Eigen::VectorXd& theta) const {
  return potential_->Value(z, theta);
}

void NaturalGradientLeaf::AccumulateGrad(const Eigen::VectorXd& z,
                                         const Eigen::VectorXd& theta,
                                         const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b,
                                         Eigen::Ref<Eigen::VectorXd> zbar,
                                         Eigen::Ref<Eigen::VectorXd> grad) const {
  potential_->AccumulateForceGrad(z, theta, a, zbar, grad);
  metric_->AccumulateGrad(z, theta, -a * b.transpose(), zbar, grad);
}

// ---------------------------------------------------------------------------

RawVmLeaf::RawVmLeaf(Eigen::VectorXd velocity,
                     std::shared_ptr<const MetricModel> metric)
    : velocity_(std::move(velocity)), metric_(std::move(metric)) {
  if (!metric_) throw StructuralError("raw leaf needs a metric");
  if (velocity_.size() != metric_->dim()) {
    throw StructuralError("raw leaf velocity dimension " +
                          std::to_string(velocity_.size()) +
                          " != metric dimension " +
                          std::to_string(metric_->dim()));
  }
}

RawVmLeaf::RawVmLeaf(Eigen::VectorXd velocity,
                     std::shared_ptr<const MetricModel> metric,
                     ParamVector& params, const std::string& name,
                     bool trainable)
    : RawVmLeaf(velocity, std::move(metric)) {
  velocity_slice_ = params.Register(name, velocity, trainable);
}

RawVmLeaf::RawVmLeaf(ParamSlice velocity_slice,
                     std::shared_ptr<const MetricModel> metric)
    : RawVmLeaf(Eigen::VectorXd::Zero(velocity_slice.length),
                std::move(metric)) {
  velocity_slice_ = velocity_slice;
}

std::string RawVmLeaf::description() const {
  return "raw_vm(" + metric_->kind() + ")";
}

bool RawVmLeaf::parameterized() const {
  return !velocity_slice_.empty() || !metric_->param_slice().empty();
}

Eigen::VectorXd RawVmLeaf::Velocity(const Eigen::VectorXd&,
                                    const Eigen::VectorXd& theta) const {
  if (velocity_slice_.empty()) return velocity_;
  return theta.segment(velocity_slice_.offset, velocity_slice_.length);
}

LeafOutput RawVmLeaf::Evaluate(const Eigen::VectorXd& z,
                               const Eigen::VectorXd& theta) const {
  LeafOutput out;
  out.metric = metric_->Evaluate(z, theta);
  out.force = out.metric * Velocity(z, theta);
  return out;
}

std::optional<double> RawVmLeaf::PotentialValue(const Eigen::VectorXd&,
                                                const Eigen::VectorXd&) const {
  if (velocity_slice_.empty() && velocity_.isZero(0.0)) return 0.0;
  return std::nullopt;
}

void RawVmLeaf::AccumulateGrad(const Eigen::VectorXd& z,
                               const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b,
                               Eigen::Ref<Eigen::VectorXd> zbar,
                               Eigen::Ref<Eigen::VectorXd> grad) const {
  // S = a^T M (v - b)
  const Eigen::VectorXd v = Velocity(z, theta);
  metric_->AccumulateGrad(z, theta, a * (v - b).transpose(), zbar, grad);
  if (!velocity_slice_.empty()) {
    grad.segment(velocity_slice_.offset, velocity_slice_.length) +=
        metric_->Evaluate(z, theta) * a;
  }
}

// ---------------------------------------------------------------------------

std::shared_ptr<LeafPolicy> MakeDamper(int dim, double gain) {
  if (!(gain > 0.0)) throw StructuralError("damper gain must be > 0");
  return std::make_shared<RawVmLeaf>(Eigen::VectorXd::Zero(dim),
                                     ConstantMetric::Scaled(dim, gain));
}

std::shared_ptr<LeafPolicy> MakeDamper(const Eigen::VectorXd& gains) {
  if (!(gains.array() > 0.0).all()) {
    throw StructuralError("damper gains must be > 0");
  }
  return std::make_shared<RawVmLeaf>(
      Eigen::VectorXd::Zero(gains.size()),
      std::make_shared<ConstantMetric>(gains.asDiagonal().toDenseMatrix()));
}

std::shared_ptr<LeafPolicy> MakeAttractor(Eigen::VectorXd goal, double gain,
                                          double weight) {
  const int dim = static_cast<int>(goal.size());
  return std::make_shared<NaturalGradientLeaf>(
      std::make_shared<QuadraticPotential>(std::move(goal), gain),
      ConstantMetric::Scaled(dim, weight));
}

std::shared_ptr<LeafPolicy> MakeBarrier(double margin, double gain,
                                        double weight) {
  return std::make_shared<NaturalGradientLeaf>(
      std::make_shared<BarrierPotential>(margin, gain),
      std::make_shared<BarrierMetric>(margin, weight));
}

}  // namespace tree_motion
