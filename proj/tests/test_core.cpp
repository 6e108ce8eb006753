#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "treemoo/bench/windfarm.hpp"
#include "treemoo/constraints.hpp"
#include "treemoo/dataset.hpp"
#include "treemoo/design_space.hpp"
#include "treemoo/pareto.hpp"
#include "treemoo/rng.hpp"

using namespace treemoo;

namespace {

std::vector<std::vector<double>> sorted_front(const ParetoArchive& a) { return a.front(); }

}  // namespace

TEST(Dominates, Examples) {
  EXPECT_TRUE(dominates({1, 2}, {2, 2}));
  EXPECT_FALSE(dominates({1, 2}, {1, 2}));
  EXPECT_FALSE(dominates({1, 3}, {2, 2}));
  EXPECT_THROW((void)dominates({1, 2}, {1, 2, 3}), ContractViolation);
}

TEST(Dominates, StrictPartialOrder) {
  Rng rng(7);
  std::vector<std::vector<double>> ys(60);
  for (auto& y : ys) y = {std::floor(rng.uniform() * 4), std::floor(rng.uniform() * 4)};
  for (const auto& a : ys) {
    EXPECT_FALSE(dominates(a, a));
    for (const auto& b : ys) {
      if (dominates(a, b)) {
        EXPECT_FALSE(dominates(b, a));
        for (const auto& c : ys)
          EXPECT_TRUE(!dominates(b, c) || dominates(a, c));
      }
    }
  }
}

TEST(ParetoArchive, InsertExamples) {
  auto base = [] {
    ParetoArchive a;
    a.insert(Point{}, {1, 4});
    a.insert(Point{}, {4, 1});
    return a;
  };
  auto a = base();
  EXPECT_TRUE(a.insert(Point{}, {3, 3}));
  EXPECT_EQ(sorted_front(a), (std::vector<std::vector<double>>{{1, 4}, {3, 3}, {4, 1}}));

  auto b = base();
  EXPECT_FALSE(b.insert(Point{}, {5, 5}));
  EXPECT_EQ(b.size(), 2u);

  auto c = base();
  EXPECT_TRUE(c.insert(Point{}, {0, 0}));
  EXPECT_EQ(sorted_front(c), (std::vector<std::vector<double>>{{0, 0}}));
}

TEST(ParetoArchive, DuplicateKeepsIncumbent) {
  ParetoArchive a;
  EXPECT_TRUE(a.insert(Point({1.0}), {1, 1}));
  EXPECT_FALSE(a.insert(Point({2.0}), {1, 1}));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.entries()[0].point.values[0], 1.0);
}

TEST(ParetoArchive, OrderInsensitive) {
  Rng rng(11);
  std::vector<std::vector<double>> ys(40);
  for (auto& y : ys) y = {rng.uniform(), rng.uniform()};
  ParetoArchive ref;
  for (const auto& y : ys) ref.insert(Point{}, y);
  for (int rep = 0; rep < 10; ++rep) {
    rng.shuffle(ys);
    ParetoArchive a;
    for (const auto& y : ys) a.insert(Point{}, y);
    EXPECT_EQ(a.front(), ref.front());
  }
}

TEST(ParetoArchive, MutuallyNondominated) {
  Rng rng(5);
  ParetoArchive a;
  for (int i = 0; i < 200; ++i) a.insert(Point{}, {rng.uniform(), rng.uniform(), rng.uniform()});
  for (const auto& e : a.entries())
    for (const auto& f : a.entries()) EXPECT_FALSE(dominates(e.y, f.y));
}

TEST(Hypervolume, Examples) {
  EXPECT_DOUBLE_EQ(hypervolume_2d({{0, 0}}, {1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(hypervolume_2d({{0, 0.5}, {0.5, 0}}, {1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(hypervolume_2d({}, {1, 1}), 0.0);
  EXPECT_THROW((void)hypervolume_2d({{2, 0}}, {1, 1}), ContractViolation);
}

TEST(Hypervolume, MonotoneUnderInsertion) {
  Rng rng(3);
  ParetoArchive a;
  double last = 0.0;
  for (int i = 0; i < 300; ++i) {
    a.insert(Point{}, {rng.uniform(), rng.uniform()});
    const double hv = a.hypervolume({1, 1});
    EXPECT_GE(hv, last);
    last = hv;
  }
}

TEST(Hypervolume, ThreeObjectivesUnsupported) {
  ParetoArchive a;
  a.insert(Point{}, {0, 0, 0});
  EXPECT_THROW((void)a.hypervolume({1, 1, 1}), Error);
}

TEST(DesignSpace, Validation) {
  EXPECT_THROW(FeatureSpec::continuous("x", 1.0, 1.0).validate(), Error);
  EXPECT_THROW(FeatureSpec::categorical("c", {}).validate(), Error);
  EXPECT_THROW(FeatureSpec::categorical("c", {"a", "a"}).validate(), Error);
  DesignSpace empty;
  EXPECT_THROW(empty.validate(), Error);

  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", 0, 1));
  s.add_constraint(LinearConstraint{"bad", {{VarRef::feature(3), 1.0}}, Sense::Le, 1.0});
  EXPECT_THROW(s.validate(), Error);
}

TEST(DesignSpace, IndicatorGuardMustBeBinary) {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", 0, 1));
  s.add_aux(AuxVar::bounded("d", 0, 1));
  s.add_constraint(IndicatorConstraint{
      "g", VarRef::aux(0), true, LinearConstraint{"", {{VarRef::feature(0), 1.0}}, Sense::Le, 0.5}});
  EXPECT_THROW(s.validate(), Error);
}

TEST(DesignSpace, ConvexQuadraticNeedsFlagOtherwise) {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", -1, 1));
  s.add_feature(FeatureSpec::continuous("y", -1, 1));
  QuadraticConstraint q{"q",
                        {{VarRef::feature(0), VarRef::feature(0), -1.0}},
                        {},
                        Sense::Le,
                        0.0,
                        false};
  s.add_constraint(q);
  EXPECT_THROW(s.validate(), Error);
  s.constraints.clear();
  q.nonconvex = true;
  s.add_constraint(q);
  EXPECT_NO_THROW(s.validate());
}

TEST(DesignSpace, ParseAndNameReferences) {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", 0, 1));
  s.add_feature(FeatureSpec::categorical("c", {"red", "blue"}));
  s.add_aux(AuxVar::binary("b"));
  EXPECT_EQ(s.parse_ref("x"), VarRef::feature(0));
  EXPECT_EQ(s.parse_ref("c=blue"), VarRef::label_of(1, 1));
  EXPECT_EQ(s.parse_ref("b"), VarRef::aux(0));
  EXPECT_EQ(s.ref_name(VarRef::label_of(1, 0)), "c=red");
  EXPECT_THROW((void)s.parse_ref("c"), Error);
  EXPECT_THROW((void)s.parse_ref("c=green"), Error);
  EXPECT_THROW((void)s.parse_ref("nope"), Error);
}

TEST(Constraints, ScaledViolationDividesByRowNorm) {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", 0, 10));
  const Constraint c = LinearConstraint{"c", {{VarRef::feature(0), 3.0}}, Sense::Le, 3.0};
  s.add_constraint(c);
  EXPECT_DOUBLE_EQ(scaled_violation(c, Point({2.0})), 1.0);  // (6 - 3) / 3
  EXPECT_DOUBLE_EQ(scaled_violation(c, Point({1.0})), 0.0);
  EXPECT_TRUE(is_feasible(s, Point({1.0 + 1e-7})));
  EXPECT_FALSE(is_feasible(s, Point({1.001})));
}

TEST(Constraints, IndicatorOnLabel) {
  DesignSpace s;
  s.add_feature(FeatureSpec::categorical("p", {"a", "b"}));
  s.add_feature(FeatureSpec::continuous("C", 0, 10));
  s.add_constraint(IndicatorConstraint{
      "cap", VarRef::label_of(0, 1), true,
      LinearConstraint{"", {{VarRef::feature(1), 1.0}}, Sense::Le, 3.0}});
  EXPECT_TRUE(is_feasible(s, Point({0.0, 8.0})));
  EXPECT_FALSE(is_feasible(s, Point({1.0, 8.0})));
  EXPECT_TRUE(is_feasible(s, Point({1.0, 2.0})));
}

TEST(Constraints, OutOfBoundsIsInfeasible) {
  DesignSpace s;
  s.add_feature(FeatureSpec::continuous("x", 0, 1));
  EXPECT_FALSE(is_feasible(s, Point({1.5})));
  EXPECT_TRUE(is_feasible(s, Point({0.5})));
}

// Aux variables that are each blocked by a shared quadratic row must still
// be assigned from the rows they do determine.
TEST(CompleteAux, WindfarmPairAuxAreAssigned) {
  const auto m = bench::WindfarmModel::defaults();
  const auto s = bench::windfarm_space(m, false);
  const std::size_t nt = m.max_turbines;
  std::vector<double> v(s.size(), 0.0);
  v[0] = 100.0;
  v[nt] = 100.0;
  v[1] = 1200.0;
  v[nt + 1] = 100.0;
  v[2 * nt] = 1.0;
  v[2 * nt + 1] = 1.0;
  const Point full = complete_aux(s, Point(v));
  ASSERT_EQ(full.aux.size(), s.aux.size());
  for (double a : full.aux) EXPECT_TRUE(std::isfinite(a));
  EXPECT_TRUE(check_constraints(s, full).feasible());

  v[1] = 900.0;  // closer than the minimum spacing
  EXPECT_FALSE(is_feasible(s, Point(v)));
}

TEST(DataSet, RejectsNonFiniteAndRagged) {
  DataSet d;
  d.add(Point({0.0}), {1.0, 2.0});
  EXPECT_THROW(d.add(Point({1.0}), {1.0}), ContractViolation);
  EXPECT_THROW(d.add(Point({1.0}), {NAN, 1.0}), Error);
  EXPECT_TRUE(d.contains(Point({0.0})));
  EXPECT_FALSE(d.contains(Point({0.5})));
}

TEST(Rng, DeterministicStreams) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(c.index(7), 7u);
  }
}
