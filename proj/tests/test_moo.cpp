#include <gtest/gtest.h>

#include <cmath>

#include "treemoo/bench/synthetic.hpp"
#include "treemoo/bench/windfarm.hpp"
#include "treemoo/maxmin_init.hpp"
#include "treemoo/optimizer.hpp"

using namespace treemoo;

namespace {

DesignSpace unit_space() {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", 0, 1));
  return s;
}

// f = (x, 1 - x) on [0, 1]; evaluation fails for x > 0.9.
class Fragile : public Problem {
 public:
  [[nodiscard]] std::string name() const override { return "fragile"; }
  [[nodiscard]] const DesignSpace& space() const override { return space_; }
  [[nodiscard]] std::vector<double> evaluate(const Point& p) const override {
    if (p.values[0] > 0.9) throw Error("fragile: simulator crashed");
    return {p.values[0], 1.0 - p.values[0]};
  }
  [[nodiscard]] std::vector<double> reference_point() const override { return {2.0, 2.0}; }
  [[nodiscard]] InitialDesign initial_design() const override { return InitialDesign::Uniform; }

 private:
  DesignSpace space_ = unit_space();
};

OptimizerConfig quick_config(std::size_t budget, std::size_t n_initial) {
  OptimizerConfig c;
  c.budget = budget;
  c.n_initial = n_initial;
  c.gbrt.num_trees = 50;
  return c;
}

}  // namespace

TEST(Weights, OnSimplexWithMeanOneHalf) {
  Rng rng(12);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto w = sample_weights(2, rng);
    EXPECT_NEAR(w[0] + w[1], 1.0, 1e-12);
    EXPECT_GE(w[0], 0.0);
    mean += w[0] / n;
  }
  EXPECT_NEAR(mean, 0.5, 0.02);
  EXPECT_EQ(sample_weights(1, rng), std::vector<double>{1.0});
}

TEST(Propose, FlatSurrogateGoesToTheFarthestPoint) {
  DataSet d;
  d.add(Point({0.0}), {1.0, 1.0});
  d.add(Point({0.1}), {1.0, 1.0});
  Rng rng(1);
  const auto p = propose(d, unit_space(), OptimizerConfig{}, rng);
  EXPECT_NEAR(p.point.values[0], 1.0, 1e-6);
  EXPECT_EQ(p.no_good_cuts, 0u);
}

TEST(Propose, DuplicateGuardSkipsSampledCells) {
  DesignSpace s;
  s.add_feature(FeatureSpec::categorical("c", {"a", "b", "c"}));
  DataSet d;
  d.add(Point({0.0}), {0.0});
  d.add(Point({1.0}), {10.0});
  OptimizerConfig cfg;
  cfg.kappa = 0.0;
  cfg.gbrt.min_data_per_leaf = 1;
  Rng rng(2);
  const auto p = propose(d, s, cfg, rng);
  EXPECT_EQ(p.point.label(0), 2u);
  EXPECT_GE(p.no_good_cuts, 1u);
  EXPECT_FALSE(d.contains(p.point));
}

TEST(Propose, UnsatisfiableSpaceIsReported) {
  auto s = unit_space();
  s.add_constraint(LinearConstraint{"lo", {{VarRef::feature(0), 1.0}}, Sense::Ge, 0.8});
  s.add_constraint(LinearConstraint{"hi", {{VarRef::feature(0), 1.0}}, Sense::Le, 0.2});
  DataSet d;
  d.add(Point({0.0}), {1.0});
  d.add(Point({1.0}), {0.0});
  Rng rng(3);
  EXPECT_THROW((void)propose(d, s, OptimizerConfig{}, rng), Error);
}

TEST(Run, BudgetEqualToInitialDesignOnlyEvaluatesIt) {
  const auto p = bench::make_synthetic("schaffer");
  const auto out = run_entmoot(*p, quick_config(6, 6), 5);
  ASSERT_EQ(out.record.iterations.size(), 6u);
  for (const auto& it : out.record.iterations) EXPECT_EQ(it.phase, "initial");
}

TEST(Run, ConfigValidation) {
  const auto p = bench::make_synthetic("schaffer");
  EXPECT_THROW((void)run_entmoot(*p, quick_config(5, 6), 1), Error);
  EXPECT_THROW((void)run_entmoot(*p, quick_config(5, 0), 1), Error);
}

TEST(Run, FonsecaRecordIsCompleteAndMonotone) {
  const auto p = bench::make_synthetic("fonseca_fleming");
  std::size_t sunk = 0;
  OptimizerConfig cfg;  // defaults: 80 evaluations, 10 initial
  const auto out = run_entmoot(*p, cfg, 101, std::nullopt, [&](const IterationRecord&) { ++sunk; });
  const auto& its = out.record.iterations;
  ASSERT_EQ(its.size(), 80u);
  EXPECT_EQ(sunk, 80u);
  for (std::size_t i = 0; i < its.size(); ++i) {
    EXPECT_EQ(its[i].index, i);
    EXPECT_EQ(its[i].phase, i < 10 ? "initial" : "proposal");
    EXPECT_EQ(its[i].y, p->evaluate(its[i].point));
    if (i >= 10) {
      EXPECT_EQ(its[i].weights.size(), 2u);
      EXPECT_FALSE(its[i].solver_status.empty());
    }
    if (i > 0) {
      EXPECT_GE(its[i].hypervolume, its[i - 1].hypervolume);
    }
  }
  EXPECT_GT(its.back().hypervolume, 0.0);
  for (const auto& e : out.archive.entries())
    for (const auto& f : out.archive.entries()) EXPECT_FALSE(dominates(e.y, f.y));
}

TEST(Run, SameSeedSameRecord) {
  const auto p = bench::make_synthetic("s_plus");
  const auto a = run_entmoot(*p, quick_config(16, 6), 9);
  const auto b = run_entmoot(*p, quick_config(16, 6), 9);
  ASSERT_EQ(a.record.iterations.size(), b.record.iterations.size());
  for (std::size_t i = 0; i < a.record.iterations.size(); ++i)
    EXPECT_EQ(a.record.iterations[i].point.values, b.record.iterations[i].point.values);
}

TEST(Run, FailedEvaluationTakesTheWorstObservedValues) {
  Fragile prob;
  const std::vector<Point> init{Point({0.1}), Point({0.5}), Point({0.95})};
  const auto out = run_entmoot(prob, quick_config(3, 3), 1, init);
  const auto& it = out.record.iterations[2];
  EXPECT_TRUE(it.failed);
  EXPECT_EQ(it.y, (std::vector<double>{0.5, 0.9}));
  EXPECT_EQ(out.archive.size(), 2u);
}

TEST(MaxMin, OneDimensionAfterTheMidpointGoesToAnEnd) {
  const auto s = unit_space();
  const PinFn pin = [](std::size_t i, Rng&) {
    Pin p;
    if (i == 0)
      p.constraints.push_back(LinearConstraint{"mid", {{VarRef::feature(0), 1.0}}, Sense::Eq, 0.5});
    return p;
  };
  Rng rng(1);
  const auto pts = feasible_maxmin_init(s, 3, pin, rng, default_sampler_config());
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_NEAR(pts[0].values[0], 0.5, 1e-9);
  const double second = pts[1].values[0];
  EXPECT_TRUE(std::abs(second) < 1e-6 || std::abs(second - 1.0) < 1e-6) << second;
  EXPECT_NEAR(pts[2].values[0], 1.0 - second, 1e-6);
}

TEST(MaxMin, WindfarmPinsFixTheTurbineCount) {
  const bench::WindfarmProblem wf;
  Rng rng(7);
  const PinFn pin = [&](std::size_t i, Rng& r) { return wf.sample_pin(i, r); };
  const auto pts = feasible_maxmin_init(wf.space(), 3, pin, rng, default_sampler_config());
  const std::size_t nt = wf.model().max_turbines;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(wf.layout(pts[i]).size(), i + 1);
    EXPECT_TRUE(is_feasible(wf.required_space(), pts[i]));
  }
  EXPECT_GE(pts[0].values[0], 0.5 * wf.model().field);
  EXPECT_DOUBLE_EQ(pts[0].values[0], pts[0].values[nt]);
}

TEST(InitialDesign, UniformDesignIsSeeded) {
  const auto p = bench::make_synthetic("kursawe");
  const auto a = make_initial_design(*p, 10, 4, default_sampler_config());
  const auto b = make_initial_design(*p, 10, 4, default_sampler_config());
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].values, b[i].values);
    EXPECT_TRUE(p->space().in_bounds(a[i]));
  }
  EXPECT_NE(make_initial_design(*p, 10, 5, default_sampler_config())[0].values, a[0].values);
}
