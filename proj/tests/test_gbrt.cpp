#include <gtest/gtest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "treemoo/gbrt.hpp"

using namespace treemoo;
namespace tt = treemoo::testing;

namespace {

std::vector<FeatureSpec> one_continuous() { return {FeatureSpec::continuous("x", 0, 1)}; }

}  // namespace

TEST(Gbrt, StumpFitsTwoPointsExactly) {
  GbrtConfig g;
  g.num_trees = 1;
  g.max_depth = 1;
  g.min_data_per_leaf = 1;
  g.learning_rate = 1.0;
  const auto ens = train_gbrt(one_continuous(), {Point({0.0}), Point({1.0})}, {0.0, 1.0}, g);
  ASSERT_EQ(ens.trees.size(), 1u);
  EXPECT_DOUBLE_EQ(ens.trees[0].nodes[0].threshold, 0.5);
  EXPECT_DOUBLE_EQ(ens.predict(Point({0.0})), 0.0);
  EXPECT_DOUBLE_EQ(ens.predict(Point({1.0})), 1.0);
  EXPECT_DOUBLE_EQ(ens.predict(Point({0.3})), 0.0);
}

TEST(Gbrt, ConstantTargetHasNoTrees) {
  const auto ens = train_gbrt(one_continuous(), {Point({0.1}), Point({0.5}), Point({0.9})},
                              {3.0, 3.0, 3.0}, GbrtConfig{});
  EXPECT_TRUE(ens.trees.empty());
  EXPECT_DOUBLE_EQ(ens.predict(Point({0.7})), 3.0);
}

TEST(Gbrt, DefaultEnsembleShape) {
  Rng rng(4);
  std::vector<Point> x;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    const double v = rng.uniform();
    x.push_back(Point({v}));
    y.push_back(std::sin(6.0 * v));
  }
  const auto ens = train_gbrt(one_continuous(), x, y, GbrtConfig{});
  EXPECT_EQ(ens.trees.size(), 400u);
  for (const auto& t : ens.trees) EXPECT_LE(t.depth(), 3u);
  EXPECT_NO_THROW(ens.validate());
}

TEST(Gbrt, CategoricalSplitGroupsLabels) {
  GbrtConfig g;
  g.num_trees = 1;
  g.max_depth = 1;
  g.min_data_per_leaf = 1;
  g.learning_rate = 1.0;
  const std::vector<FeatureSpec> f{FeatureSpec::categorical("c", {"a", "b", "c"})};
  const auto ens = train_gbrt(f, {Point({0.0}), Point({1.0}), Point({2.0})}, {0.0, 0.0, 10.0}, g);
  ASSERT_EQ(ens.trees.size(), 1u);
  const auto& root = ens.trees[0].nodes[0];
  ASSERT_FALSE(root.is_leaf());
  EXPECT_EQ(root.left_labels, 0b011u);
  EXPECT_DOUBLE_EQ(ens.predict(Point({0.0})), 0.0);
  EXPECT_DOUBLE_EQ(ens.predict(Point({1.0})), 0.0);
  EXPECT_DOUBLE_EQ(ens.predict(Point({2.0})), 10.0);
}

TEST(Gbrt, TrainingErrorNeverIncreases) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    tt::FixtureOptions o;
    const auto s = tt::random_space(rng, o);
    const auto d = tt::random_data(rng, s, 25, 1);
    GbrtConfig g;
    g.num_trees = 50;
    const auto ens = train_gbrt(s, d, 0, g);
    for (std::size_t t = 1; t < ens.training_mse.size(); ++t)
      EXPECT_LE(ens.training_mse[t], ens.training_mse[t - 1] + 1e-12);
  }
}

TEST(Gbrt, ThresholdsAreMidpointsBetweenObservedValues) {
  Rng rng(9);
  const std::vector<FeatureSpec> f{FeatureSpec::continuous("x", 0, 10)};
  std::vector<Point> x;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    const double v = std::round(rng.uniform(0, 10) * 4) / 4;
    x.push_back(Point({v}));
    y.push_back(v * v - 3 * v);
  }
  GbrtConfig g;
  g.num_trees = 20;
  const auto ens = train_gbrt(f, x, y, g);
  for (double t : ens.thresholds(0)) {
    double below = -kInf, above = kInf;
    for (const auto& p : x) {
      if (p.values[0] <= t) below = std::max(below, p.values[0]);
      else above = std::min(above, p.values[0]);
    }
    EXPECT_DOUBLE_EQ(t, 0.5 * (below + above));
  }
}

TEST(Gbrt, PredictionMatchesLeafSum) {
  const auto fx = tt::random_fixture(17, 1.96);
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Point p = tt::random_point(rng, fx.space);
    for (const auto& e : fx.problem.ensembles) {
      double v = e.base_score;
      for (const auto& t : e.trees) v += t.nodes[t.leaf_of(p, e.features)].value;
      EXPECT_DOUBLE_EQ(e.predict(p), v);
    }
  }
}

TEST(Gbrt, RejectsBadInput) {
  EXPECT_THROW((void)train_gbrt(one_continuous(), {}, {}, GbrtConfig{}), Error);
  EXPECT_THROW((void)train_gbrt(one_continuous(), {Point({0.1}), Point({0.2})}, {1.0, NAN},
                                GbrtConfig{}),
               Error);
  GbrtConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}
