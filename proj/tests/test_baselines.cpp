#include <gtest/gtest.h>

#include <cmath>

#include "treemoo/bench/synthetic.hpp"
#include "treemoo/bench/windfarm.hpp"
#include "treemoo/nsga2.hpp"
#include "treemoo/optimizer.hpp"
#include "treemoo/random_search.hpp"

using namespace treemoo;

namespace {

Individual ind(std::vector<double> y, bool feasible = true, double violation = 0.0) {
  Individual i;
  i.y = std::move(y);
  i.feasible = feasible;
  i.violation = violation;
  return i;
}

}  // namespace

TEST(GeneCodec, Layout) {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", -1, 1));
  s.add_feature(FeatureSpec::categorical("b", {"0", "1"}));
  s.add_feature(FeatureSpec::categorical("c", {"p", "q", "r"}));
  const GeneCodec codec(s);
  ASSERT_EQ(codec.size(), 5u);
  EXPECT_EQ(codec.decode({0.3, 0.49, 0.2, 0.9, 0.4}).values, (std::vector<double>{0.3, 0.0, 1.0}));
  EXPECT_EQ(codec.decode({2.0, 0.5, 0.7, 0.1, 0.4}).values, (std::vector<double>{1.0, 1.0, 0.0}));
  const Point p({-0.5, 1.0, 2.0});
  EXPECT_EQ(codec.encode(p), (std::vector<double>{-0.5, 1.0, 0.0, 0.0, 1.0}));
  EXPECT_EQ(codec.decode(codec.encode(p)).values, p.values);
}

TEST(Nsga, ConstraintDomination) {
  EXPECT_TRUE(constraint_dominates(ind({5, 5}), ind({0, 0}, false, 0.1)));
  EXPECT_FALSE(constraint_dominates(ind({0, 0}, false, 0.1), ind({5, 5})));
  EXPECT_TRUE(constraint_dominates(ind({9, 9}, false, 0.1), ind({0, 0}, false, 0.2)));
  EXPECT_TRUE(constraint_dominates(ind({1, 1}), ind({1, 2})));
  EXPECT_FALSE(constraint_dominates(ind({1, 2}), ind({2, 1})));
}

TEST(Nsga, NondominatedSortRanks) {
  std::vector<Individual> pop{ind({1, 4}), ind({2, 2}), ind({4, 1}), ind({3, 3}), ind({5, 5}),
                              ind({0, 0}, false, 1.0)};
  const auto fronts = nondominated_sort(pop);
  ASSERT_EQ(fronts.size(), 4u);
  EXPECT_EQ(fronts[0], (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(fronts[1], (std::vector<std::size_t>{3}));
  EXPECT_EQ(fronts[2], (std::vector<std::size_t>{4}));
  EXPECT_EQ(fronts[3], (std::vector<std::size_t>{5}));
  EXPECT_EQ(pop[5].rank, 3u);
}

TEST(Nsga, CrowdingKeepsTheExtremes) {
  std::vector<Individual> pop{ind({0, 4}), ind({1, 3}), ind({1.1, 2.9}), ind({3, 1}), ind({4, 0})};
  const auto kept = survive(pop, 4);
  ASSERT_EQ(kept.size(), 4u);
  auto has = [&](double a) {
    for (const auto& k : kept)
      if (k.y[0] == a) return true;
    return false;
  };
  EXPECT_TRUE(has(0) && has(4) && has(3));
  EXPECT_TRUE(has(1) != has(1.1));
}

TEST(Nsga, SurvivalIsElitist) {
  Rng rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Individual> pool;
    for (int i = 0; i < 20; ++i)
      pool.push_back(ind({rng.uniform(), rng.uniform()}, rng.uniform() < 0.8, rng.uniform()));
    auto copy = pool;
    const auto first = nondominated_sort(copy).front();
    const auto kept = survive(pool, 10);
    ASSERT_EQ(kept.size(), 10u);
    // Every kept individual beats or ties every dropped one under rank.
    if (first.size() <= 10)
      for (std::size_t i : first) {
        bool found = false;
        for (const auto& k : kept) found = found || k.y == pool[i].y;
        EXPECT_TRUE(found);
      }
  }
}

TEST(Nsga, OperatorsStayInBounds) {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", -2, 3));
  s.add_feature(FeatureSpec::continuous("y", 0, 1));
  const GeneCodec codec(s);
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> a{rng.uniform(-2, 3), rng.uniform()}, b{rng.uniform(-2, 3), rng.uniform()};
    detail::sbx(a, b, codec, 15.0, rng);
    detail::polynomial_mutation(a, codec, 1.0, 20.0, rng);
    for (const auto& c : {a, b}) {
      EXPECT_GE(c[0], -2.0);
      EXPECT_LE(c[0], 3.0);
      EXPECT_GE(c[1], 0.0);
      EXPECT_LE(c[1], 1.0);
    }
  }
}

TEST(Nsga, BudgetEqualToPopulationOnlyEvaluatesTheInitialDesign) {
  const auto p = bench::make_synthetic("fonseca_fleming");
  NsgaConfig cfg;
  cfg.budget = 10;
  const auto out = nsga2_run(*p, cfg, 3);
  ASSERT_EQ(out.record.iterations.size(), 10u);
  for (const auto& it : out.record.iterations) EXPECT_EQ(it.phase, "initial");
}

TEST(Nsga, ExactBudgetWithPartialLastGeneration) {
  const auto p = bench::make_synthetic("schaffer");
  NsgaConfig cfg;
  cfg.budget = 37;
  const auto out = nsga2_run(*p, cfg, 3);
  EXPECT_EQ(out.record.iterations.size(), 37u);
  NsgaConfig odd;
  odd.population = 7;
  EXPECT_THROW(odd.validate(), Error);
}

TEST(Nsga, ConvergesOnSchaffer) {
  const auto p = bench::make_synthetic("schaffer");
  const auto truth = bench::true_front(*p, 10000);
  const double full = hypervolume_2d(truth, p->reference_point());
  NsgaConfig cfg;
  cfg.budget = 200;
  const auto out = nsga2_run(*p, cfg, 11);
  EXPECT_GT(out.archive.hypervolume(p->reference_point()), 0.95 * full);
}

TEST(Random, SamplesAreFeasibleAndSeeded) {
  const auto p = bench::make_synthetic("s_minus");
  RandomConfig cfg;
  cfg.budget = 20;
  const auto a = random_feasible_run(*p, cfg, 8);
  const auto b = random_feasible_run(*p, cfg, 8);
  ASSERT_EQ(a.record.iterations.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(a.record.iterations[i].phase, i < 10 ? "initial" : "sample");
    EXPECT_EQ(a.record.iterations[i].point.values, b.record.iterations[i].point.values);
    EXPECT_TRUE(a.record.iterations[i].feasible);
  }
}

TEST(Random, WindfarmCyclesTheTurbineCount) {
  const bench::WindfarmProblem wf;
  RandomConfig cfg;
  cfg.n_initial = 16;
  cfg.budget = 32;
  const auto out = random_feasible_run(wf, cfg, 21);
  ASSERT_EQ(out.record.iterations.size(), 32u);
  for (std::size_t i = 0; i < 32; ++i) {
    const auto& it = out.record.iterations[i];
    EXPECT_EQ(wf.layout(it.point).size(), i % 16 + 1) << i;
    EXPECT_TRUE(it.feasible) << i;
  }
  EXPECT_EQ(count_infeasible(out.record), 0u);
}

TEST(Baselines, ShareTheInitialDesign) {
  const auto p = bench::make_synthetic("kursawe");
  OptimizerConfig ec;
  ec.budget = ec.n_initial = 10;
  RandomConfig rc;
  rc.budget = rc.n_initial = 10;
  NsgaConfig nc;
  nc.budget = nc.population = 10;
  const auto e = run_entmoot(*p, ec, 42);
  const auto r = random_feasible_run(*p, rc, 42);
  const auto n = nsga2_run(*p, nc, 42);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(e.record.iterations[i].point.values, r.record.iterations[i].point.values);
    EXPECT_EQ(e.record.iterations[i].point.values, n.record.iterations[i].point.values);
  }
}
