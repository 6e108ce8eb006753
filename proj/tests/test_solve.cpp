#include <gtest/gtest.h>

#include <cmath>

#include "oracles/brute_force.hpp"
#include "support/fixtures.hpp"
#include "treemoo/solver.hpp"

using namespace treemoo;
namespace tt = treemoo::testing;

namespace {

TreeEnsemble stump_ensemble(const DesignSpace& s, double thr, double lo, double hi) {
  TreeEnsemble e;
  e.features = s.features;
  Tree t;
  t.nodes.resize(3);
  t.nodes[0].feature = 0;
  t.nodes[0].threshold = thr;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  t.nodes[1].value = lo;
  t.nodes[2].value = hi;
  e.trees.push_back(t);
  return e;
}

AcquisitionProblem stump_problem(DesignSpace s, double kappa) {
  DataSet d;
  d.add(Point({0.9}), {1.0});
  auto e = stump_ensemble(s, 0.5, 0.0, 1.0);
  return make_chebyshev_problem(s, {e}, d, {1.0}, kappa,
                                make_similarity(s, d, SimilarityMeasure::Overlap),
                                NormalizationBounds{{0.0}, {1.0}});
}

DesignSpace unit_space() {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", 0, 1));
  return s;
}

}  // namespace

TEST(Solve, SingleStumpPicksTheLowLeaf) {
  const auto enc = encode(stump_problem(unit_space(), 0.0));
  const auto r = solve(enc, SolveConfig{});
  ASSERT_TRUE(r.point);
  EXPECT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 0.0, 1e-12);
  EXPECT_LE(r.point->values[0], 0.5);
  EXPECT_LE(r.model_violation, 1e-9);
}

TEST(Solve, ExplorationPushesAwayFromData) {
  // kappa large: the far corner x = 0 wins (distance 0.81, leaf 0).
  const auto enc = encode(stump_problem(unit_space(), 1.96));
  const auto r = solve(enc, SolveConfig{});
  ASSERT_TRUE(r.point);
  EXPECT_NEAR(r.point->values[0], 0.0, 1e-6);
  EXPECT_NEAR(r.objective, -1.96 * 0.81, 1e-6);
}

TEST(Solve, ContradictoryRowsAreInfeasible) {
  auto s = unit_space();
  s.add_constraint(LinearConstraint{"le", {{VarRef::feature(0), 1.0}}, Sense::Le, 0.2});
  s.add_constraint(LinearConstraint{"ge", {{VarRef::feature(0), 1.0}}, Sense::Ge, 0.5});
  DataSet d;
  d.add(Point({0.9}), {1.0});
  AcquisitionProblem p;
  p.space = s;
  p.ensembles = {stump_ensemble(s, 0.5, 0.0, 1.0)};
  p.weights = {1.0};
  p.norm_lo = {0.0};
  p.norm_den = {1.0};
  p.data = d.points;
  p.similarity = make_similarity(s, d, SimilarityMeasure::Overlap);
  p.rebuild_thresholds();
  const auto r = solve(encode(p), SolveConfig{});
  EXPECT_EQ(r.status, SolveStatus::Infeasible);
  EXPECT_FALSE(r.point);
}

TEST(Solve, UserConstraintIsRespected) {
  auto s = unit_space();
  s.add_constraint(LinearConstraint{"ge", {{VarRef::feature(0), 1.0}}, Sense::Ge, 0.6});
  auto p = stump_problem(s, 0.0);
  const auto r = solve(encode(p), SolveConfig{});
  ASSERT_TRUE(r.point);
  EXPECT_GE(r.point->values[0], 0.6 - 1e-9);
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
}

TEST(Solve, RootBoundIsBelowEveryPoint) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto fx = tt::random_fixture(seed, 1.96);
    const auto enc = encode(fx.problem);
    const double lb = bound_cell(enc, Domain::root(fx.space));
    Rng rng(seed * 31);
    for (int k = 0; k < 100; ++k) {
      const Point p = tt::random_point(rng, fx.space);
      EXPECT_LE(lb, fx.problem.value(p) + 1e-9) << "seed " << seed;
    }
  }
}

TEST(Solve, MatchesBruteForceOracle) {
  SolveConfig cfg;
  cfg.rel_gap = 1e-6;
  cfg.abs_gap = 1e-9;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const double kappa = seed % 3 == 0 ? 0.0 : 1.96;
    const auto fx = tt::random_fixture(seed, kappa);
    const auto want = oracle::brute_force(fx.problem, 1e-10);
    const auto r = solve(encode(fx.problem), cfg);
    ASSERT_TRUE(r.point) << "seed " << seed;
    EXPECT_EQ(r.status, SolveStatus::Optimal) << "seed " << seed;
    const double tol = 1e-5 * std::max(1.0, std::abs(want.value));
    EXPECT_NEAR(r.objective, want.value, tol) << "seed " << seed;
    EXPECT_NEAR(fx.problem.value(*r.point), r.objective, 1e-9) << "seed " << seed;
    EXPECT_LE(r.bound, r.objective + 1e-12);
  }
}

TEST(Solve, DeterministicUnderNodeLimit) {
  SolveConfig cfg;
  cfg.node_limit = 50;
  cfg.time_limit_secs = 1e9;
  const auto fx = tt::random_fixture(77, 1.96, {8, 3, 10, 4, true, 2});
  const auto enc = encode(fx.problem);
  const auto a = solve(enc, cfg), b = solve(enc, cfg);
  ASSERT_TRUE(a.point && b.point);
  EXPECT_EQ(a.point->values, b.point->values);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ(a.nodes, b.nodes);
}

TEST(Solve, NoGoodCutMovesTheSolution) {
  auto p = stump_problem(unit_space(), 0.0);
  const auto first = solve(encode(p), SolveConfig{});
  ASSERT_TRUE(first.point);
  p.excluded.push_back(p.signature(*first.point));
  const auto second = solve(encode(p), SolveConfig{});
  ASSERT_TRUE(second.point);
  EXPECT_NE(p.signature(*second.point), p.signature(*first.point));
  EXPECT_NEAR(second.objective, 1.0, 1e-9);
}

TEST(Solve, ConfigValidation) {
  SolveConfig c;
  c.rel_gap = -1;
  EXPECT_THROW(c.validate(), Error);
}
