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

#include "tests/support/random_trees.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tree_motion/diffeo.h"
#include "tree_motion/maps.h"
#include "tree_motion/policies.h"

namespace tree_motion::testing {
namespace {

class Generator {
 public:
  Generator(std::uint64_t seed, const RandomTreeOptions& options)
      : rng_(seed), options_(options) {}

  RandomTree Build() {
    const int root_dim = Dim();
    AddNode(root_dim);
    // Anchor leaf on a copy of the root keeps the root metric nonsingular.
    const int anchor = AddNode(root_dim);
    AddEdge(0, anchor, std::make_shared<IdentityMap>(root_dim));
    AddLeaf(anchor, options_.natural_gradient_only
                        ? MakeAttractor(Normal(root_dim), 0.5 + Unit(),
                                        0.5 + Unit())
                        : MakeDamper(root_dim, 0.2 + Unit()));
    Grow(0, 0, /*branches=*/1 + Int(0, 2));

    for (int i = 0; i < params_.size(); ++i) {
      params_.mutable_values()[i] += options_.param_noise * normal_(rng_);
    }
    RandomTree out;
    out.tree = std::make_unique<TransformTree>(nodes_, edges_, leaves_);
    out.params = std::move(params_);
    return out;
  }

 private:
  int Int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  double Unit() { return std::uniform_real_distribution<double>(0, 1)(rng_); }
  int Dim() { return Int(1, options_.max_dim); }
  Eigen::VectorXd Normal(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal_(rng_);
    return v;
  }
  Eigen::MatrixXd RandomSpd(int n) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = normal_(rng_);
    return a * a.transpose() / n + 0.3 * Eigen::MatrixXd::Identity(n, n);
  }
  bool Trainable() { return !options_.mix_frozen || Unit() < 0.6; }
  std::string Name(const char* what) {
    return std::string(what) + std::to_string(counter_++);
  }

  int AddNode(int dim) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({id, dim, ""});
    return id;
  }
  void AddEdge(int parent, int child,
               std::shared_ptr<const DifferentiableMap> map) {
    edges_.push_back({parent, child, std::move(map), ""});
    maps_.resize(nodes_.size());
    maps_[child] = edges_.back().map;
  }
  void AddLeaf(int node, std::shared_ptr<const LeafPolicy> policy) {
    leaves_.push_back({node, std::move(policy), ""});
  }

  void Grow(int parent, int depth, int branches) {
    for (int b = 0; b < branches; ++b) {
      const int parent_dim = nodes_[parent].dim;
      int kind = Int(0, 4);
      if (kind == 4 && (!options_.learnable_components || parent_dim < 2)) {
        kind = 0;
      }
      std::shared_ptr<const DifferentiableMap> map;
      bool distance = false;
      switch (kind) {
        case 0:
          map = std::make_shared<IdentityMap>(parent_dim);
          break;
        case 1: {
          Eigen::MatrixXd a(Dim(), parent_dim);
          for (int i = 0; i < a.size(); ++i) a.data()[i] = normal_(rng_);
          a /= std::sqrt(static_cast<double>(parent_dim));
          map = std::make_shared<LinearMap>(a, Normal(a.rows()));
          break;
        }
        case 2: {
          std::vector<double> lengths(parent_dim);
          for (double& l : lengths) l = 0.5 + Unit();
          map = std::make_shared<PlanarArmFk>(lengths, Int(-1, parent_dim - 1));
          break;
        }
        case 3: {
          // Far enough away that sampled points never reach the center.
          map = std::make_shared<DistanceToPoint>(
              Normal(parent_dim).normalized() * (20.0 + 5.0 * Unit()));
          distance = true;
          break;
        }
        default: {
          DiffeoChainOptions opts;
          opts.layers = Int(1, 4);
          opts.num_features = 8;
          opts.length_scale = 0.5 + Unit();
          opts.seed = rng_();
          map = std::make_shared<DiffeoChain>(parent_dim, opts, params_,
                                              Name("diffeo"), Trainable());
        }
      }
      const int child = AddNode(map->output_dim());
      AddEdge(parent, child, map);
      const bool expand = depth + 1 < options_.max_depth && Unit() < 0.55;
      if (expand) {
        Grow(child, depth + 1, 1 + Int(0, 1));
      } else {
        AddLeaf(child, RandomLeaf(child, distance, kind == 4));
      }
    }
  }

  std::shared_ptr<const MetricModel> RandomMetric(int dim) {
    if (options_.learnable_components && Unit() < 0.5) {
      CholeskyNetOptions opts;
      opts.hidden = {6};
      opts.epsilon = 0.05;
      opts.seed = rng_();
      return std::make_shared<CholeskyMetricNet>(dim, opts, params_,
                                                 Name("metric"), Trainable());
    }
    return std::make_shared<ConstantMetric>(RandomSpd(dim));
  }

  std::shared_ptr<const LeafPolicy> RandomLeaf(int node, bool distance,
                                               bool latent) {
    const int dim = nodes_[node].dim;
    if (distance && Unit() < 0.7) {
      // Active for most sampled points (distance about 20-25).
      return MakeBarrier(24.0 + 6.0 * Unit(), 0.5 + Unit(), 0.5 + Unit());
    }
    if (latent && Unit() < 0.7) {
      return std::make_shared<NaturalGradientLeaf>(
          std::make_shared<LatentQuadraticPotential>(Normal(dim), maps_[node]),
          RandomMetric(dim));
    }
    const int choice = Int(0, options_.natural_gradient_only ? 1 : 3);
    switch (choice) {
      case 0:
        return MakeAttractor(Normal(dim), 0.5 + Unit(), 0.5 + Unit());
      case 1: {
        std::shared_ptr<const Potential> potential;
        if (options_.learnable_components && Unit() < 0.3) {
          potential = std::make_shared<QuadraticPotential>(
              Normal(dim), 0.5 + Unit(), params_, Name("goal"), Trainable());
        } else {
          potential = std::make_shared<QuadraticPotential>(Normal(dim),
                                                           0.5 + Unit());
        }
        return std::make_shared<NaturalGradientLeaf>(potential,
                                                     RandomMetric(dim));
      }
      case 2:
        if (options_.learnable_components && Unit() < 0.3) {
          return std::make_shared<RawVmLeaf>(Normal(dim), RandomMetric(dim),
                                             params_, Name("velocity"),
                                             Trainable());
        }
        return std::make_shared<RawVmLeaf>(Normal(dim), RandomMetric(dim));
      default:
        return MakeDamper(dim, 0.2 + Unit());
    }
  }

  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  RandomTreeOptions options_;
  std::vector<TreeNode> nodes_;
  std::vector<TreeEdge> edges_;
  std::vector<TreeLeaf> leaves_;
  std::vector<std::shared_ptr<const DifferentiableMap>> maps_;
  ParamVector params_;
  int counter_ = 0;
};

}  // namespace

RandomTree MakeRandomTree(std::uint64_t seed, const RandomTreeOptions& options) {
  return Generator(seed, options).Build();
}

Eigen::VectorXd RandomConfiguration(int dim, std::uint64_t seed,
                                    double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-radius, radius);
  Eigen::VectorXd q(dim);
  for (int i = 0; i < dim; ++i) q[i] = unif(rng);
  return q;
}

DemoSet RandomDemos(int dim, int trajectories, int samples,
                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  DemoSet demos;
  for (int i = 0; i < trajectories; ++i) {
    Trajectory traj;
    for (int t = 0; t < samples; ++t) {
      Sample s;
      s.t = 0.1 * t;
      s.q.resize(dim);
      s.qdot.resize(dim);
      for (int j = 0; j < dim; ++j) s.q[j] = unif(rng);
      for (int j = 0; j < dim; ++j) s.qdot[j] = unif(rng);
      traj.push_back(std::move(s));
    }
    demos.trajectories.push_back(std::move(traj));
  }
  return demos;
}

Eigen::VectorXd ComposeToNode(const TransformTree& tree, int node,
                              const Eigen::VectorXd& q,
                              const Eigen::VectorXd& theta) {
  Eigen::VectorXd z = q;
  const std::vector<int> path = tree.PathFromRoot(node);
  for (size_t i = 1; i < path.size(); ++i) {
    z = tree.edge_into(path[i]).map->Value(z, theta);
  }
  return z;
}

double ComposedRootPotential(const TransformTree& tree,
                             const Eigen::VectorXd& q,
                             const Eigen::VectorXd& theta) {
  double total = 0.0;
  for (const TreeLeaf& leaf : tree.leaves()) {
    const Eigen::VectorXd z = ComposeToNode(tree, leaf.node, q, theta);
    total += leaf.policy->PotentialValue(z, theta).value();
  }
  return total;
}

Eigen::VectorXd CentralGradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = xm[i] = x[i];
  }
  return g;
}

Eigen::MatrixXd CentralJacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const Eigen::VectorXd col = (f(xp) - f(xm)) / (2.0 * h);
    if (i == 0) jac.resize(col.size(), x.size());
    jac.col(i) = col;
    xp[i] = xm[i] = x[i];
  }
  return jac;
}

}  // namespace tree_motion::testing
