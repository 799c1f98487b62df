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

#include "tree_motion/transform_tree.h"

#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "tests/support/random_trees.h"
#include "tree_motion/errors.h"
#include "tree_motion/flat_solver.h"
#include "tree_motion/maps.h"
#include "tree_motion/policies.h"

namespace tree_motion {
namespace {

const Eigen::VectorXd kNoTheta;

// (x1, x2) -> x1^2.
class SquareFirstMap : public DifferentiableMap {
 public:
  std::string kind() const override { return "square_first"; }
  int input_dim() const override { return 2; }
  int output_dim() const override { return 1; }
  Eigen::VectorXd Value(const Eigen::VectorXd& x,
                        const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Constant(1, x[0] * x[0]);
  }
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& x,
                           const Eigen::VectorXd&) const override {
    Eigen::MatrixXd j(1, 2);
    j << 2 * x[0], 0;
    return j;
  }
  void AccumulateJacobianBilinear(const Eigen::VectorXd&,
                                  const Eigen::VectorXd&,
                                  const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v,
                                  Eigen::Ref<Eigen::VectorXd> xbar,
                                  Eigen::Ref<Eigen::VectorXd>) const override {
    xbar[0] += 2 * u[0] * v[0];
  }
};

std::shared_ptr<LeafPolicy> RawLeaf(const Eigen::VectorXd& v,
                                    const Eigen::MatrixXd& m) {
  return std::make_shared<RawVmLeaf>(v, std::make_shared<ConstantMetric>(m));
}

TEST(TransformTreeTest, RejectsMismatchedEdgeNamingIt) {
  const auto id3 = std::make_shared<IdentityMap>(3);
  try {
    TransformTree({{0, 2, ""}, {1, 3, "task"}}, {{0, 1, id3, "bad_edge"}},
                  {{1, MakeDamper(3, 1.0), ""}});
    FAIL() << "expected a structural error";
  } catch (const StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("bad_edge"), std::string::npos)
        << e.what();
  }
}

TEST(TransformTreeTest, RejectsInteriorLeaf) {
  const auto id = std::make_shared<IdentityMap>(2);
  EXPECT_THROW(TransformTree({{0, 2, ""}, {1, 2, ""}, {2, 2, ""}},
                             {{0, 1, id, ""}, {1, 2, id, ""}},
                             {{1, MakeDamper(2, 1.0), ""},
                              {2, MakeDamper(2, 1.0), ""}}),
               StructuralError);
}

TEST(TransformTreeTest, RejectsChildlessNodeWithoutLeaf) {
  const auto id = std::make_shared<IdentityMap>(2);
  EXPECT_THROW(TransformTree({{0, 2, ""}, {1, 2, ""}, {2, 2, ""}},
                             {{0, 1, id, ""}, {0, 2, id, ""}},
                             {{1, MakeDamper(2, 1.0), ""}}),
               StructuralError);
}

TEST(ForwardPassTest, IdentityChild) {
  const TransformTree tree({{0, 2, ""}, {1, 2, ""}},
                           {{0, 1, std::make_shared<IdentityMap>(2), ""}},
                           {{1, MakeDamper(2, 1.0), ""}});
  const TreeStates states = ForwardPass(tree, Eigen::Vector2d(0.3, -0.1), kNoTheta);
  EXPECT_EQ(states[1].coord, Eigen::Vector2d(0.3, -0.1));
  EXPECT_EQ(states[1].jac_to_parent, Eigen::Matrix2d::Identity());
}

TEST(ForwardPassTest, NonlinearChild) {
  const TransformTree tree({{0, 2, ""}, {1, 1, ""}},
                           {{0, 1, std::make_shared<SquareFirstMap>(), ""}},
                           {{1, MakeDamper(1, 1.0), ""}});
  const TreeStates states = ForwardPass(tree, Eigen::Vector2d(2, 5), kNoTheta);
  EXPECT_DOUBLE_EQ(states[1].coord[0], 4.0);
  EXPECT_DOUBLE_EQ(states[1].jac_to_parent(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(states[1].jac_to_parent(0, 1), 0.0);
}

TEST(ForwardPassTest, StraightArmEndEffector) {
  const TransformTree tree(
      {{0, 2, ""}, {1, 2, ""}},
      {{0, 1, std::make_shared<PlanarArmFk>(std::vector<double>{1.0, 1.0}), ""}},
      {{1, MakeDamper(2, 1.0), ""}});
  const TreeStates states = ForwardPass(tree, Eigen::Vector2d::Zero(), kNoTheta);
  EXPECT_NEAR(states[1].coord[0], 2.0, 1e-15);
  EXPECT_NEAR(states[1].coord[1], 0.0, 1e-15);
}

TEST(BackwardPassTest, ScaledChild) {
  const TransformTree tree(
      {{0, 2, ""}, {1, 2, ""}},
      {{0, 1,
        std::make_shared<LinearMap>(2.0 * Eigen::MatrixXd::Identity(2, 2),
                                    Eigen::VectorXd::Zero(2)),
        ""}},
      {{1, RawLeaf(Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()), ""}});
  TreeStates states = ForwardPass(tree, Eigen::Vector2d(0.5, 0.5), kNoTheta);
  LeafEvaluate(tree, states, kNoTheta);
  BackwardPass(tree, states);
  EXPECT_EQ(states[0].pulled_force, Eigen::Vector2d(2, 0));
  EXPECT_EQ(states[0].pulled_metric, 4.0 * Eigen::Matrix2d::Identity());
}

TEST(BackwardPassTest, SumsSiblings) {
  const auto id = std::make_shared<IdentityMap>(2);
  const TransformTree tree(
      {{0, 2, ""}, {1, 2, ""}, {2, 2, ""}}, {{0, 1, id, ""}, {0, 2, id, ""}},
      {{1, RawLeaf(Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()), ""},
       {2, RawLeaf(Eigen::Vector2d(0, 1), Eigen::Matrix2d::Identity()), ""}});
  TreeStates states = ForwardPass(tree, Eigen::Vector2d::Zero(), kNoTheta);
  LeafEvaluate(tree, states, kNoTheta);
  BackwardPass(tree, states);
  EXPECT_EQ(states[0].pulled_force, Eigen::Vector2d(1, 1));
  EXPECT_EQ(states[0].pulled_metric, 2.0 * Eigen::Matrix2d::Identity());
}

// Root force and metric against sums over leaves of composed-map pullbacks.
TEST(BackwardPassTest, MatchesFlatPullbacks) {
  for (int seed = 0; seed < 20; ++seed) {
    testing::RandomTreeOptions options;
    options.max_depth = 3;
    const testing::RandomTree t = testing::MakeRandomTree(seed, options);
    const TransformTree& tree = *t.tree;
    const Eigen::VectorXd& theta = t.params.values();
    const Eigen::VectorXd q = testing::RandomConfiguration(tree.root_dim(), seed);
    TreeStates states = ForwardPass(tree, q, theta);
    LeafEvaluate(tree, states, theta);
    BackwardPass(tree, states);

    Eigen::VectorXd force = Eigen::VectorXd::Zero(tree.root_dim());
    Eigen::MatrixXd metric = Eigen::MatrixXd::Zero(tree.root_dim(), tree.root_dim());
    for (const TreeLeaf& leaf : tree.leaves()) {
      const Eigen::MatrixXd jac = testing::CentralJacobian(
          [&](const Eigen::VectorXd& x) {
            return testing::ComposeToNode(tree, leaf.node, x, theta);
          },
          q, 1e-6);
      const LeafOutput out = leaf.policy->Evaluate(
          testing::ComposeToNode(tree, leaf.node, q, theta), theta);
      force += jac.transpose() * out.force;
      metric += jac.transpose() * out.metric * jac;
    }
    const double scale = 1.0 + metric.cwiseAbs().maxCoeff();
    EXPECT_LT((states[0].pulled_force - force).lpNorm<Eigen::Infinity>() / scale,
              1e-6)
        << "seed " << seed;
    EXPECT_LT((states[0].pulled_metric - metric).cwiseAbs().maxCoeff() / scale,
              1e-6)
        << "seed " << seed;
  }
}

TEST(ResolveTest, DiagonalSolve) {
  TreeStates states(1);
  states[0].pulled_force = Eigen::Vector2d(2, 4);
  states[0].pulled_metric = 2.0 * Eigen::Matrix2d::Identity();
  EXPECT_LT((Resolve(states) - Eigen::Vector2d(1, 2)).lpNorm<Eigen::Infinity>(),
            1e-15);
}

TEST(ResolveTest, ZeroForce) {
  TreeStates states(1);
  states[0].pulled_force = Eigen::VectorXd::Zero(1);
  states[0].pulled_metric = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_EQ(Resolve(states), Eigen::VectorXd::Zero(1));
}

TEST(ResolveTest, SingularMetricReportsEigenvalue) {
  TreeStates states(1);
  states[0].pulled_force = Eigen::Vector2d(1, 1);
  states[0].pulled_metric = Eigen::Vector2d(1, 0).asDiagonal();
  try {
    Resolve(states);
    FAIL() << "expected a singular metric error";
  } catch (const SingularMetricError& e) {
    EXPECT_NEAR(e.min_eigenvalue(), 0.0, 1e-15);
  }
  const Eigen::VectorXd u = Resolve(states, 1e-3);
  EXPECT_NEAR(u[0], 1.0 / 1.001, 1e-12);
  EXPECT_NEAR(u[1], 1.0 / 1e-3, 1e-9);
}

TEST(ResolveTest, RandomSpdMatchesStackedLeastSquares) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 5;
    // Root problem: sum_k ||v_k - u||^2_{M_k} for two random SPD metrics,
    // solved by whitening and stacking.
    Eigen::MatrixXd m1(d, d), m2(d, d);
    for (int i = 0; i < d * d; ++i) m1.data()[i] = normal(rng);
    for (int i = 0; i < d * d; ++i) m2.data()[i] = normal(rng);
    m1 = m1 * m1.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    m2 = m2 * m2.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd v1(d), v2(d);
    for (int i = 0; i < d; ++i) v1[i] = normal(rng);
    for (int i = 0; i < d; ++i) v2[i] = normal(rng);
    const Eigen::MatrixXd r1 = Eigen::LLT<Eigen::MatrixXd>(m1).matrixU();
    const Eigen::MatrixXd r2 = Eigen::LLT<Eigen::MatrixXd>(m2).matrixU();
    Eigen::MatrixXd a(2 * d, d);
    a << r1, r2;
    Eigen::VectorXd b(2 * d);
    b << r1 * v1, r2 * v2;
    const Eigen::VectorXd expected = a.colPivHouseholderQr().solve(b);

    TreeStates states(1);
    states[0].pulled_force = m1 * v1 + m2 * v2;
    states[0].pulled_metric = m1 + m2;
    EXPECT_LT((Resolve(states) - expected).lpNorm<Eigen::Infinity>(), 1e-9);
  }
}

TEST(EvaluatePolicyTest, SingleLeafReturnsItsVelocity) {
  Eigen::Matrix3d m;
  m << 2, 0.5, 0, 0.5, 1, 0.1, 0, 0.1, 3;
  const Eigen::Vector3d v(0.4, -1, 2);
  const TransformTree tree({{0, 3, ""}, {1, 3, ""}},
                           {{0, 1, std::make_shared<IdentityMap>(3), ""}},
                           {{1, RawLeaf(v, m), ""}});
  const Eigen::VectorXd q = testing::RandomConfiguration(3, 1);
  EXPECT_LT((EvaluatePolicy(tree, q, kNoTheta) - v).lpNorm<Eigen::Infinity>(),
            1e-14);
  EXPECT_LT((FlatSolve(tree, q, kNoTheta) - v).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(EvaluatePolicyTest, TwoUnitLeavesAverage) {
  const auto id = std::make_shared<IdentityMap>(2);
  const TransformTree tree(
      {{0, 2, ""}, {1, 2, ""}, {2, 2, ""}}, {{0, 1, id, ""}, {0, 2, id, ""}},
      {{1, RawLeaf(Eigen::Vector2d(1, 3), Eigen::Matrix2d::Identity()), ""},
       {2, RawLeaf(Eigen::Vector2d(-3, 1), Eigen::Matrix2d::Identity()), ""}});
  EXPECT_LT((EvaluatePolicy(tree, Eigen::Vector2d::Zero(), kNoTheta) -
             Eigen::Vector2d(-1, 2))
                .lpNorm<Eigen::Infinity>(),
            1e-15);
}

TEST(EvaluatePolicyTest, ArmWithAttractorAndDamperMatchesFlatSolve) {
  const TransformTree tree(
      {{0, 3, ""}, {1, 2, ""}, {2, 3, ""}},
      {{0, 1, std::make_shared<PlanarArmFk>(std::vector<double>{1, 1, 1}), ""},
       {0, 2, std::make_shared<IdentityMap>(3), ""}},
      {{1, MakeAttractor(Eigen::Vector2d(1.2, 1.4), 2.0, 1.0), ""},
       {2, MakeDamper(3, 0.1), ""}});
  for (int seed = 0; seed < 10; ++seed) {
    const Eigen::VectorXd q = testing::RandomConfiguration(3, seed, 3.0);
    EXPECT_LT((EvaluatePolicy(tree, q, kNoTheta) - FlatSolve(tree, q, kNoTheta))
                  .lpNorm<Eigen::Infinity>(),
              1e-10);
  }
}

TEST(FlatSolveTest, RankDeficientPullbackIsSingular) {
  Eigen::MatrixXd j(1, 2);
  j << 1, 1;
  const TransformTree tree(
      {{0, 2, ""}, {1, 1, ""}},
      {{0, 1, std::make_shared<LinearMap>(j, Eigen::VectorXd::Zero(1)), ""}},
      {{1, RawLeaf(Eigen::VectorXd::Constant(1, 6), 3.0 * Eigen::MatrixXd::Identity(1, 1)),
        ""}});
  EXPECT_THROW(FlatSolve(tree, Eigen::Vector2d::Zero(), kNoTheta),
               SingularMetricError);
  EXPECT_THROW(EvaluatePolicy(tree, Eigen::Vector2d::Zero(), kNoTheta),
               SingularMetricError);
}

TEST(FlatSolveTest, RandomTreesAgreeWithTreeAlgorithm) {
  for (int seed = 0; seed < 100; ++seed) {
    const testing::RandomTree t = testing::MakeRandomTree(500 + seed);
    const Eigen::VectorXd q =
        testing::RandomConfiguration(t.tree->root_dim(), seed);
    const Eigen::VectorXd& theta = t.params.values();
    EXPECT_LT((EvaluatePolicy(*t.tree, q, theta) - FlatSolve(*t.tree, q, theta))
                  .lpNorm<Eigen::Infinity>(),
              1e-10)
        << "seed " << seed;
  }
}

TEST(SubtreeTest, RenumbersFromNewRoot) {
  const auto id = std::make_shared<IdentityMap>(2);
  const TransformTree tree(
      {{0, 3, "joints"}, {1, 2, "ee"}, {2, 2, "goal_space"}, {3, 3, "damp"}},
      {{0, 1, std::make_shared<PlanarArmFk>(std::vector<double>{1, 1, 1}), ""},
       {1, 2, id, ""},
       {0, 3, std::make_shared<IdentityMap>(3), ""}},
      {{2, MakeAttractor(Eigen::Vector2d(1, 1), 1.0, 1.0), ""},
       {3, MakeDamper(3, 1.0), ""}});
  const TransformTree sub = tree.Subtree(1);
  EXPECT_EQ(sub.root_dim(), 2);
  EXPECT_EQ(sub.num_nodes(), 2);
  EXPECT_EQ(sub.num_leaves(), 1);
  EXPECT_EQ(sub.nodes()[0].name, "ee");
  EXPECT_EQ(tree.PathFromRoot(2), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(tree.SubtaskNode(0), 2);
  EXPECT_FALSE(tree.PathParameterized(2));
}

TEST(RootPotentialTest, SumsLeafPotentials) {
  const auto id = std::make_shared<IdentityMap>(2);
  const TransformTree tree(
      {{0, 2, ""}, {1, 2, ""}, {2, 2, ""}}, {{0, 1, id, ""}, {0, 2, id, ""}},
      {{1, MakeAttractor(Eigen::Vector2d(1, 0), 2.0, 1.0), ""},
       {2, MakeDamper(2, 1.0), ""}});
  const TreeStates states = ForwardPass(tree, Eigen::Vector2d(0, 1), kNoTheta);
  EXPECT_DOUBLE_EQ(*RootPotential(tree, states, kNoTheta), 2.0);
}

}  // namespace
}  // namespace tree_motion
