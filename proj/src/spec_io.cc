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

#include "tree_motion/spec_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>

#include "tree_motion/diffeo.h"
#include "tree_motion/errors.h"
#include "tree_motion/maps.h"
#include "tree_motion/policies.h"

namespace tree_motion {
namespace {

using nlohmann::json;

// Diameter estimates use at most this many demonstration points.
constexpr int kMaxDiameterPoints = 2000;
constexpr double kLengthScaleFactor = 0.45;

std::string JoinKinds(const std::vector<std::string>& kinds) {
  std::string out;
  for (const std::string& k : kinds) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

[[noreturn]] void UnknownKind(const std::string& where, const std::string& what,
                              const std::string& kind,
                              const std::vector<std::string>& registered) {
  throw StructuralError(where + ": unknown " + what + " kind '" + kind +
                        "'; registered kinds: " + JoinKinds(registered));
}

Eigen::VectorXd ToVector(const json& j) {
  if (!j.is_array()) throw StructuralError("expected a numeric array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd ToMatrix(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw StructuralError("expected a matrix as an array of rows");
  }
  const size_t rows = j.size(), cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw StructuralError("ragged matrix rows");
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

template <typename T>
T Value(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

const json& Required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw StructuralError(std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string DiffeoComponent(const std::string& edge_name) {
  return edge_name + "/diffeo";
}

struct PendingDiffeo {
  std::string component;
  int parent = 0;
};

class Builder {
 public:
  Builder(const json& spec, const std::map<std::string, double>& scales)
      : spec_(spec), scales_(scales) {}

  LoadedTree Build() {
    ParseNodes();
    std::vector<TreeEdge> edges = ParseEdges();
    std::vector<TreeLeaf> leaves = ParseLeaves();
    return LoadedTree{TransformTree(nodes_, std::move(edges), std::move(leaves)),
                      std::move(params_), std::move(resolved_)};
  }

  const std::vector<PendingDiffeo>& pending() const { return pending_; }

 private:
  void ParseNodes() {
    const json& nodes = Required(spec_, "nodes");
    if (!nodes.is_array()) throw StructuralError("'nodes' must be an array");
    for (const json& n : nodes) {
      TreeNode node;
      node.id = Required(n, "id").get<int>();
      node.dim = Required(n, "dim").get<int>();
      node.name = Value<std::string>(n, "name", "");
      nodes_.push_back(node);
      dims_[node.id] = node.dim;
    }
  }

  int DimOf(int id, const std::string& where) const {
    auto it = dims_.find(id);
    if (it == dims_.end()) {
      throw StructuralError(where + " references unknown node " +
                            std::to_string(id));
    }
    return it->second;
  }

  std::vector<TreeEdge> ParseEdges() {
    std::vector<TreeEdge> edges;
    const json& list = Value<json>(spec_, "edges", json::array());
    for (const json& e : list) {
      TreeEdge edge;
      edge.parent = Required(e, "parent").get<int>();
      edge.child = Required(e, "child").get<int>();
      edge.name = Value<std::string>(e, "name", "");
      const std::string label =
          "edge '" + (edge.name.empty() ? std::to_string(edge.parent) + "->" +
                                              std::to_string(edge.child)
                                        : edge.name) +
          "'";
      try {
        edge.map = BuildMap(Required(e, "map"), edge, label);
      } catch (const json::exception& ex) {
        throw StructuralError(label + ": " + ex.what());
      } catch (const StructuralError& ex) {
        const std::string what = ex.what();
        if (what.rfind(label, 0) == 0) throw;
        throw StructuralError(label + ": " + what);
      }
      maps_[edge.child] = edge.map;
      edges.push_back(std::move(edge));
    }
    return edges;
  }

  std::shared_ptr<const DifferentiableMap> BuildMap(const json& m,
                                                    const TreeEdge& edge,
                                                    const std::string& label) {
    const std::string kind = Required(m, "kind").get<std::string>();
    const int in_dim = DimOf(edge.parent, label);
    if (kind == "identity") return std::make_shared<IdentityMap>(in_dim);
    if (kind == "linear") {
      const Eigen::MatrixXd a = ToMatrix(Required(m, "matrix"));
      if (m.contains("offset")) {
        return std::make_shared<LinearMap>(a, ToVector(m["offset"]));
      }
      return std::make_shared<LinearMap>(a);
    }
    if (kind == "planar_arm_fk") {
      const std::vector<double> lengths =
          Required(m, "lengths").get<std::vector<double>>();
      int point = -1;
      if (m.contains("point") && !m["point"].is_null()) {
        if (m["point"].is_string()) {
          if (m["point"].get<std::string>() != "ee") {
            throw StructuralError("point must be \"ee\" or a link index");
          }
        } else {
          point = m["point"].get<int>();
          if (point < 0) throw StructuralError("link index must be >= 0");
        }
      }
      return std::make_shared<PlanarArmFk>(lengths, point);
    }
    if (kind == "distance_to_point") {
      return std::make_shared<DistanceToPoint>(ToVector(Required(m, "center")));
    }
    if (kind == "diffeo_chain") {
      const std::string name = edge.name.empty()
                                   ? "edge" + std::to_string(edge.child)
                                   : edge.name;
      const std::string component = DiffeoComponent(name);
      DiffeoChainOptions opts;
      opts.layers = Value<int>(m, "layers", opts.layers);
      opts.num_features = Value<int>(m, "features_D", opts.num_features);
      opts.seed = Value<std::uint64_t>(m, "seed", edge.child);
      if (opts.layers < 1 || opts.num_features < 1) {
        throw StructuralError("diffeo chain needs layers >= 1, features_D >= 1");
      }
      auto scale = scales_.find(component);
      const json ls = Value<json>(m, "length_scale", json("auto"));
      if (scale != scales_.end()) {
        opts.length_scale = scale->second;
      } else if (ls.is_string()) {
        if (ls.get<std::string>() != "auto") {
          throw StructuralError("length_scale must be a number or \"auto\"");
        }
        pending_.push_back({component, edge.parent});
        opts.length_scale = 1.0;
      } else {
        opts.length_scale = ls.get<double>();
      }
      if (!(opts.length_scale > 0.0)) {
        throw StructuralError("length_scale must be > 0");
      }
      resolved_[component] = opts.length_scale;
      const bool learnable = Value<bool>(m, "learnable", true);
      return std::make_shared<DiffeoChain>(in_dim, opts, params_, component,
                                           learnable);
    }
    UnknownKind(label, "map", kind, RegisteredMapKinds());
  }

  std::vector<TreeLeaf> ParseLeaves() {
    std::vector<TreeLeaf> leaves;
    const json& list = Required(spec_, "leaves");
    for (size_t k = 0; k < list.size(); ++k) {
      const json& l = list[k];
      TreeLeaf leaf;
      leaf.node = Required(l, "node").get<int>();
      leaf.name = Value<std::string>(l, "name", "");
      const std::string name =
          leaf.name.empty() ? "leaf" + std::to_string(k) : leaf.name;
      const std::string label = "leaf '" + name + "'";
      try {
        leaf.policy = BuildPolicy(Required(l, "policy"), leaf.node, name, label);
      } catch (const json::exception& ex) {
        throw StructuralError(label + ": " + ex.what());
      } catch (const StructuralError& ex) {
        const std::string what = ex.what();
        if (what.rfind(label, 0) == 0) throw;
        throw StructuralError(label + ": " + what);
      }
      leaves.push_back(std::move(leaf));
    }
    return leaves;
  }

  std::shared_ptr<const MetricModel> BuildMetric(const json& m, int dim,
                                                 const std::string& name,
                                                 bool learnable,
                                                 const std::string& label) {
    const std::string kind = Value<std::string>(m, "kind", "identity");
    if (kind == "identity") return ConstantMetric::Scaled(dim, 1.0);
    if (kind == "scaled") {
      return ConstantMetric::Scaled(dim, Required(m, "weight").get<double>());
    }
    if (kind == "constant") {
      return std::make_shared<ConstantMetric>(ToMatrix(Required(m, "matrix")));
    }
    if (kind == "barrier") {
      return std::make_shared<BarrierMetric>(Required(m, "margin").get<double>(),
                                             Value<double>(m, "weight", 1.0));
    }
    if (kind == "cholesky_net") {
      const std::string space = Value<std::string>(m, "metric_space", "latent");
      if (space != "latent") {
        throw StructuralError("metric_space '" + space +
                              "' is not supported; the metric network reads "
                              "the leaf (latent) coordinate");
      }
      CholeskyNetOptions opts;
      opts.hidden = Value<std::vector<int>>(m, "hidden", opts.hidden);
      opts.epsilon = Value<double>(m, "epsilon", opts.epsilon);
      opts.init_scale = Value<double>(m, "init_scale", opts.init_scale);
      opts.seed = Value<std::uint64_t>(m, "seed", 0);
      return std::make_shared<CholeskyMetricNet>(
          dim, opts, params_, name + "/metric",
          Value<bool>(m, "learnable", learnable));
    }
    UnknownKind(label, "metric", kind, RegisteredMetricKinds());
  }

  std::shared_ptr<const Potential> BuildPotential(const json& p, int node,
                                                  const std::string& name,
                                                  bool learnable,
                                                  const std::string& label) {
    const std::string kind = Required(p, "kind").get<std::string>();
    if (kind == "quadratic") {
      const Eigen::VectorXd goal = ToVector(Required(p, "goal"));
      const double gain = Value<double>(p, "gain", 1.0);
      if (Value<bool>(p, "learnable", learnable)) {
        return std::make_shared<QuadraticPotential>(goal, gain, params_,
                                                    name + "/goal", true);
      }
      return std::make_shared<QuadraticPotential>(goal, gain);
    }
    if (kind == "latent_quadratic") {
      auto it = maps_.find(node);
      if (it == maps_.end()) {
        throw StructuralError("latent_quadratic needs a parent edge");
      }
      return std::make_shared<LatentQuadraticPotential>(
          ToVector(Required(p, "goal")), it->second);
    }
    if (kind == "barrier") {
      return std::make_shared<BarrierPotential>(
          Required(p, "margin").get<double>(), Value<double>(p, "gain", 1.0));
    }
    UnknownKind(label, "potential", kind, RegisteredPotentialKinds());
  }

  std::shared_ptr<const LeafPolicy> BuildPolicy(const json& p, int node,
                                                const std::string& name,
                                                const std::string& label) {
    const std::string kind = Required(p, "kind").get<std::string>();
    const int dim = DimOf(node, label);
    const bool learnable = Value<bool>(p, "learnable", false);
    if (kind == "natural_gradient") {
      auto potential = BuildPotential(Required(p, "potential"), node, name,
                                      learnable, label);
      auto metric = BuildMetric(Value<json>(p, "metric", json::object()),
                                potential->dim(), name, learnable, label);
      return std::make_shared<NaturalGradientLeaf>(potential, metric);
    }
    if (kind == "raw_vm") {
      const Eigen::VectorXd v = ToVector(Required(p, "velocity"));
      auto metric = BuildMetric(Value<json>(p, "metric", json::object()),
                                static_cast<int>(v.size()), name, learnable,
                                label);
      if (learnable) {
        return std::make_shared<RawVmLeaf>(v, metric, params_,
                                           name + "/velocity", true);
      }
      return std::make_shared<RawVmLeaf>(v, metric);
    }
    if (kind == "damper") {
      const json gain = Value<json>(p, "gain", json(1.0));
      if (gain.is_array()) {
        const Eigen::VectorXd gains = ToVector(gain);
        if (gains.size() != dim) {
          throw StructuralError("damper needs one gain per coordinate");
        }
        return MakeDamper(gains);
      }
      return MakeDamper(dim, gain.get<double>());
    }
    if (kind == "barrier") {
      return MakeBarrier(Required(p, "margin").get<double>(),
                         Value<double>(p, "gain", 1.0),
                         Value<double>(p, "weight", 1.0));
    }
    if (kind == "attractor") {
      return MakeAttractor(ToVector(Required(p, "goal")),
                           Value<double>(p, "gain", 1.0),
                           Value<double>(p, "weight", 1.0));
    }
    UnknownKind(label, "policy", kind, RegisteredPolicyKinds());
  }

  const json& spec_;
  const std::map<std::string, double>& scales_;
  std::vector<TreeNode> nodes_;
  std::map<int, int> dims_;
  std::map<int, std::shared_ptr<const DifferentiableMap>> maps_;
  ParamVector params_;
  std::map<std::string, double> resolved_;
  std::vector<PendingDiffeo> pending_;
};

double Diameter(const std::vector<Eigen::VectorXd>& points) {
  const size_t n = points.size();
  const size_t stride = std::max<size_t>(1, n / kMaxDiameterPoints);
  double best = 0.0;
  for (size_t i = 0; i < n; i += stride) {
    for (size_t j = i + stride; j < n; j += stride) {
      best = std::max(best, (points[i] - points[j]).norm());
    }
  }
  return best;
}

}  // namespace

const std::vector<std::string>& RegisteredMapKinds() {
  static const std::vector<std::string> kinds = {
      "identity", "planar_arm_fk", "distance_to_point", "diffeo_chain",
      "linear"};
  return kinds;
}

const std::vector<std::string>& RegisteredPolicyKinds() {
  static const std::vector<std::string> kinds = {
      "natural_gradient", "raw_vm", "damper", "barrier", "attractor"};
  return kinds;
}

const std::vector<std::string>& RegisteredMetricKinds() {
  static const std::vector<std::string> kinds = {
      "identity", "scaled", "constant", "barrier", "cholesky_net"};
  return kinds;
}

const std::vector<std::string>& RegisteredPotentialKinds() {
  static const std::vector<std::string> kinds = {"quadratic",
                                                 "latent_quadratic", "barrier"};
  return kinds;
}

LoadedTree LoadTree(const json& spec, const LoadOptions& options) {
  if (!spec.is_object()) throw StructuralError("tree spec must be an object");
  std::map<std::string, double> scales = options.length_scales;
  std::optional<LoadedTree> loaded;
  std::vector<PendingDiffeo> pending;
  try {
    Builder builder(spec, scales);
    loaded.emplace(builder.Build());
    pending = builder.pending();
  } catch (const json::exception& ex) {
    throw StructuralError(std::string("tree spec: ") + ex.what());
  }
  if (pending.empty()) return std::move(*loaded);

  if (options.demos == nullptr || options.demos->num_samples() == 0) {
    throw StructuralError(
        "diffeo_chain length_scale \"auto\" needs demonstrations (or a "
        "params file that records the resolved value)");
  }
  // Chains start as the identity, so node coordinates at the initial
  // parameters do not depend on the length scales being resolved.
  std::map<int, std::vector<Eigen::VectorXd>> points;
  for (const PendingDiffeo& p : pending) points[p.parent];
  for (const Sample* s : options.demos->Flatten()) {
    const TreeStates states =
        ForwardPass(loaded->tree, s->q, loaded->params.values());
    for (auto& [node, list] : points) list.push_back(states[node].coord);
  }
  for (const PendingDiffeo& p : pending) {
    const double diameter = Diameter(points[p.parent]);
    if (!(diameter > 0.0)) {
      throw StructuralError("cannot resolve length_scale of '" + p.component +
                            "': demonstrations have zero spread");
    }
    scales[p.component] = kLengthScaleFactor * diameter;
  }
  try {
    Builder builder(spec, scales);
    return builder.Build();
  } catch (const json::exception& ex) {
    throw StructuralError(std::string("tree spec: ") + ex.what());
  }
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw StructuralError(path + ": " + ex.what());
  }
}

LoadedTree LoadTreeFile(const std::string& path, const LoadOptions& options) {
  return LoadTree(ReadJsonFile(path), options);
}

json ParamsToJson(const ParamVector& params,
                  const std::map<std::string, double>& scales) {
  json registry = json::array();
  for (const ParamEntry& e : params.registry()) {
    registry.push_back({{"name", e.name},
                        {"offset", e.offset},
                        {"length", e.length},
                        {"trainable", e.trainable}});
  }
  const Eigen::VectorXd& v = params.values();
  json out;
  out["registry"] = std::move(registry);
  out["values"] = std::vector<double>(v.data(), v.data() + v.size());
  out["length_scales"] = scales;
  return out;
}

ParamsFile ParamsFromJson(const json& j) {
  ParamsFile file;
  try {
    const std::vector<double> values =
        Required(j, "values").get<std::vector<double>>();
    for (const json& e : Required(j, "registry")) {
      const std::string name = Required(e, "name").get<std::string>();
      const int offset = Required(e, "offset").get<int>();
      const int length = Required(e, "length").get<int>();
      if (offset != file.params.size() || length < 0 ||
          offset + length > static_cast<int>(values.size())) {
        throw StructuralError("params registry entry '" + name +
                              "' is inconsistent with the values array");
      }
      file.params.Register(
          name, Eigen::Map<const Eigen::VectorXd>(values.data() + offset, length),
          Value<bool>(e, "trainable", true));
    }
    if (file.params.size() != static_cast<int>(values.size())) {
      throw StructuralError("params values array is longer than the registry");
    }
    file.length_scales =
        Value<std::map<std::string, double>>(j, "length_scales", {});
  } catch (const json::exception& ex) {
    throw StructuralError(std::string("params file: ") + ex.what());
  }
  return file;
}

void WriteParamsFile(const std::string& path, const ParamVector& params,
                     const std::map<std::string, double>& scales) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write " + path);
  out << ParamsToJson(params, scales).dump(2) << "\n";
}

ParamsFile ReadParamsFile(const std::string& path) {
  return ParamsFromJson(ReadJsonFile(path));
}

void AssignParams(const ParamVector& source, ParamVector& target) {
  if (!source.SameLayout(target)) {
    std::ostringstream msg;
    msg << "params layout does not match the tree (file has "
        << source.registry().size() << " components / " << source.size()
        << " values, tree expects " << target.registry().size() << " / "
        << target.size() << ")";
    throw StructuralError(msg.str());
  }
  if (!source.values().allFinite()) {
    throw StructuralError("params contain non-finite values");
  }
  target.SetValues(source.values());
}

TrainConfig ParseTrainConfig(const json& j, const TransformTree& tree) {
  TrainConfig config;
  try {
    const json loss = Value<json>(j, "loss", json::object());
    config.loss.kind =
        ParseLossKind(Value<std::string>(loss, "kind", "subtask"));
    config.loss.lambda = Value<std::vector<double>>(loss, "lambda",
                                                    DefaultLambda(tree));
    if (j.contains("alpha") && !j["alpha"].is_null()) {
      config.options.alpha = j["alpha"].get<double>();
    }
    config.options.iterations =
        Value<int>(j, "iterations", config.options.iterations);
    config.options.seed = Value<std::uint64_t>(j, "seed", config.options.seed);
    config.options.minibatch =
        Value<int>(j, "minibatch", config.options.minibatch);
    config.options.momentum =
        Value<double>(j, "momentum", config.options.momentum);
  } catch (const json::exception& ex) {
    throw StructuralError(std::string("training config: ") + ex.what());
  }
  const TrainOptions& o = config.options;
  if (o.alpha && !(*o.alpha > 0.0)) {
    throw StructuralError("training config: alpha must be > 0");
  }
  if (o.iterations < 0) {
    throw StructuralError("training config: iterations must be >= 0");
  }
  if (o.minibatch < 0) {
    throw StructuralError("training config: minibatch must be >= 0");
  }
  if (!(o.momentum >= 0.0 && o.momentum < 1.0)) {
    throw StructuralError("training config: momentum must be in [0, 1)");
  }
  ValidateLossSpec(config.loss, tree);
  return config;
}

}  // namespace tree_motion
