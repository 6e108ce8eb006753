#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "treemoo/bench/registry.hpp"
#include "treemoo/constraints.hpp"
#include "treemoo/initial_design.hpp"

using namespace treemoo;
using namespace treemoo::bench;

namespace {

// Point with the first turbines active at the given coordinates.
Point layout_point(const WindfarmModel& m, const std::vector<Turbine>& ts) {
  const std::size_t nt = m.max_turbines;
  std::vector<double> v(3 * nt, 0.0);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    v[k] = ts[k].x;
    v[nt + k] = ts[k].y;
    v[2 * nt + k] = 1.0;
  }
  return Point(v);
}

WindfarmModel single_direction(double direction) {
  auto m = WindfarmModel::defaults();
  m.rose = {{10.0, direction, 1.0}};
  return m;
}

std::string temp_file(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "treemoo_test_bench";
  std::filesystem::create_directories(dir);
  const auto p = (dir / name).string();
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Synthetic, Examples) {
  const double c = 1.0 / std::sqrt(2.0);
  const auto f = eval_fonseca({c, c});
  EXPECT_NEAR(f[0], 0.0, 1e-15);
  EXPECT_NEAR(f[1], 1.0 - std::exp(-4.0), 1e-15);
  EXPECT_EQ(eval_schaffer({0.0}), (std::vector<double>{0.0, 4.0}));
  EXPECT_EQ(eval_schaffer({2.0}), (std::vector<double>{4.0, 0.0}));
  const auto k = eval_kursawe({0.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(k[0], -20.0);
  EXPECT_DOUBLE_EQ(k[1], 0.0);
  EXPECT_EQ(eval_s({0.0, 0.0}, 1.0), (std::vector<double>{0.0, 10.0}));
  EXPECT_DOUBLE_EQ(eval_s({1.0, 0.0}, 1.0)[1], 9.0 + std::sin(1.0));
  EXPECT_DOUBLE_EQ(eval_s({1.0, 0.0}, -1.0)[1], 9.0 - std::sin(1.0));
}

TEST(Synthetic, OutputRangesOnDenseSamples) {
  Rng rng(1);
  const auto fon = make_synthetic("fonseca_fleming");
  const auto sch = make_synthetic("schaffer");
  for (int i = 0; i < 100000; ++i) {
    const auto a = fon->evaluate(uniform_point(fon->space(), rng));
    EXPECT_TRUE(a[0] >= 0.0 && a[0] <= 1.0 && a[1] >= 0.0 && a[1] <= 1.0);
    const auto b = sch->evaluate(uniform_point(sch->space(), rng));
    EXPECT_TRUE(b[0] <= 9.0 && b[1] <= 25.0);
  }
}

TEST(Synthetic, RejectsOutOfBounds) {
  const auto p = make_synthetic("schaffer");
  EXPECT_THROW((void)p->evaluate(Point({3.5})), Error);
}

TEST(Synthetic, TrueFrontEndpoints) {
  const auto sch = true_front(*make_synthetic("schaffer"), 6001);
  ASSERT_FALSE(sch.empty());
  EXPECT_EQ(sch.front(), (std::vector<double>{0.0, 4.0}));
  EXPECT_EQ(sch.back(), (std::vector<double>{4.0, 0.0}));
  const auto fon = true_front(*make_synthetic("fonseca_fleming"), 100000);
  EXPECT_NEAR(fon.front()[0], 0.0, 1e-3);
  EXPECT_NEAR(fon.front()[1], 1.0 - std::exp(-4.0), 1e-3);
  for (std::size_t i = 1; i < fon.size(); ++i) {
    EXPECT_GT(fon[i][0], fon[i - 1][0]);
    EXPECT_LT(fon[i][1], fon[i - 1][1]);
  }
  // Three inputs use the Halton sweep.
  EXPECT_GT(true_front(*make_synthetic("kursawe"), 5000).size(), 10u);
  EXPECT_THROW((void)true_front(*make_synthetic("kursawe"), 0), Error);
}

TEST(Windfarm, SingleTurbine) {
  const auto m = WindfarmModel::defaults();
  const auto o = eval_windfarm({{1000, 1000}}, m);
  EXPECT_NEAR(o.efficiency, 1.0, 1e-12);
  EXPECT_NEAR(o.production, 1.0 / 16.0, 1e-12);
}

TEST(Windfarm, CrosswindPairHasNoLossDownwindPairDoes) {
  const auto m = single_direction(0.0);
  EXPECT_NEAR(eval_windfarm({{0, 0}, {0, 1000}}, m).efficiency, 1.0, 1e-12);
  const auto down = eval_windfarm({{0, 0}, {1000, 0}}, m);
  EXPECT_LT(down.efficiency, 0.99);
  EXPECT_GT(down.efficiency, 0.5);
  // Only the downstream turbine is slowed.
  EXPECT_EQ(wake_interference(m, {1000, 0}, {0, 0}, 10.0, 0.0), 0.0);
  EXPECT_GT(wake_interference(m, {0, 0}, {1000, 0}, 10.0, 0.0), 0.0);
}

TEST(Windfarm, WakeFadesWithDistance) {
  const auto m = single_direction(0.0);
  double last = 1.0;
  for (double d : {1000.0, 1500.0, 2500.0, 3800.0}) {
    const double u = wake_interference(m, {0, 0}, {d, 0}, 10.0, 0.0);
    EXPECT_LT(u, last);
    last = u;
  }
}

TEST(Windfarm, RotationByAQuarterTurnKeepsTheObjectives) {
  const auto m = WindfarmModel::defaults();
  const std::vector<Turbine> a{{200, 300}, {1500, 400}, {2900, 2200}, {800, 3500}};
  std::vector<Turbine> b;
  for (const auto& t : a) b.push_back({m.field - t.y, t.x});
  const auto oa = eval_windfarm(a, m), ob = eval_windfarm(b, m);
  EXPECT_NEAR(oa.production, ob.production, 1e-12);
  EXPECT_NEAR(oa.efficiency, ob.efficiency, 1e-12);
}

TEST(Windfarm, ProductionIsScaledEfficiency) {
  const auto m = WindfarmModel::defaults();
  Rng rng(3);
  for (std::size_t n = 1; n <= 16; ++n) {
    std::vector<Turbine> ts;
    for (std::size_t k = 0; k < n; ++k) ts.push_back({rng.uniform(0, 3900), rng.uniform(0, 3900)});
    const auto o = eval_windfarm(ts, m);
    EXPECT_NEAR(o.production, static_cast<double>(n) / 16.0 * o.efficiency, 1e-12);
    EXPECT_LE(o.efficiency, 1.0 + 1e-12);
  }
}

TEST(Windfarm, DataFilesMatchTheDefaults) {
  const std::string dir = TREEMOO_DATA_DIR "/windfarm/";
  const auto m = load_windfarm_model(dir + "wind_rose.tsv", dir + "turbine.tsv");
  const auto d = WindfarmModel::defaults();
  EXPECT_EQ(m.turbine, d.turbine);
  ASSERT_EQ(m.rose.size(), d.rose.size());
  for (std::size_t i = 0; i < m.rose.size(); ++i) {
    EXPECT_EQ(m.rose[i].speed, d.rose[i].speed);
    EXPECT_EQ(m.rose[i].direction, d.rose[i].direction);
    EXPECT_NEAR(m.rose[i].frequency, d.rose[i].frequency, 1e-15);
  }
}

TEST(Windfarm, BadTablesAreRejected) {
  const auto rose = temp_file("rose.tsv", "speed\tdir\tfreq\n5\t0\t0.5\n");
  const auto curve = temp_file("curve.tsv", "s\tp\tt\n4\t0\t0.8\n5\t100\t0.8\n");
  EXPECT_THROW((void)load_windfarm_model(rose, curve), Error);
  const auto ragged = temp_file("ragged.tsv", "s\tp\tt\n4\t0\n");
  EXPECT_THROW((void)load_windfarm_model(rose, ragged), Error);
  EXPECT_THROW((void)load_windfarm_model("/nonexistent/rose.tsv", curve), Error);
}

TEST(Windfarm, MinimumSpacing) {
  const WindfarmProblem wf;
  const auto& m = wf.model();
  EXPECT_FALSE(is_feasible(wf.required_space(), layout_point(m, {{100, 100}, {1000, 100}})));
  EXPECT_TRUE(is_feasible(wf.required_space(), layout_point(m, {{100, 100}, {1075, 100}})));
  EXPECT_TRUE(is_feasible(wf.space(), layout_point(m, {{100, 100}, {1075, 100}})));
  // Parked turbines may overlap anything.
  auto p = layout_point(m, {{100, 100}});
  p.values[1] = 100.0;
  p.values[m.max_turbines + 1] = 100.0;
  EXPECT_TRUE(is_feasible(wf.required_space(), p));
}

TEST(Windfarm, HelperConstraintsOrderAndParkTurbines) {
  const WindfarmProblem wf;
  const std::size_t nt = wf.model().max_turbines;
  std::vector<double> v(3 * nt, 0.0);
  v[1] = 2000.0;
  v[nt + 1] = 2000.0;
  v[2 * nt + 1] = 1.0;  // only turbine 2 active
  const Point p(v);
  EXPECT_TRUE(is_feasible(wf.required_space(), p));
  EXPECT_FALSE(is_feasible(wf.space(), p));
  const auto q = layout_point(wf.model(), {{2000, 2000}});
  auto moved = q;
  moved.values[3] = 500.0;  // parked turbine 4 off the origin
  EXPECT_TRUE(is_feasible(wf.space(), q));
  EXPECT_FALSE(is_feasible(wf.space(), moved));
  EXPECT_EQ(wf.evaluate(q), wf.evaluate(moved));
}

TEST(Windfarm, EvaluateNeedsATurbine) {
  const WindfarmProblem wf;
  EXPECT_THROW((void)wf.evaluate(Point(std::vector<double>(48, 0.0))), Error);
  const auto y = wf.evaluate(layout_point(wf.model(), {{100, 100}}));
  EXPECT_NEAR(y[0], -1.0 / 16.0, 1e-12);
  EXPECT_NEAR(y[1], -1.0, 1e-12);
}

TEST(Windfarm, PinsCycleTheTurbineCount) {
  const WindfarmProblem wf;
  Rng rng(1);
  for (std::size_t i = 0; i < 40; ++i) {
    const auto pin = wf.sample_pin(i, rng);
    const auto& c = std::get<LinearConstraint>(pin.constraints.at(0));
    EXPECT_EQ(c.rhs, static_cast<double>(i % 16 + 1));
    EXPECT_EQ(pin.constraints.size(), i == 0 ? 3u : 1u);
  }
}

TEST(Battery, Constraints) {
  const BatteryProblem b;
  const auto& s = b.space();
  // Ai2019 at 5C exceeds its 3.2C cap.
  std::vector<double> v{0, 5.0, 0.3, 0.5, 5e-6, 0.3, 0.5, 5e-6, 1.0, 1.0};
  EXPECT_FALSE(is_feasible(s, Point(v)));
  v[1] = 3.0;
  EXPECT_TRUE(is_feasible(s, Point(v)));
  v[0] = 2;  // Ecker2015 allows 8.2C
  v[1] = 8.0;
  EXPECT_TRUE(is_feasible(s, Point(v)));
  v[2] = 0.6;  // porosity + active fraction > 0.95
  EXPECT_FALSE(is_feasible(s, Point(v)));
}

TEST(Battery, ObjectivesAreNegatedAndPinsCycleSets) {
  const BatteryProblem b;
  const auto y = b.evaluate(Point({1, 2.0, 0.3, 0.5, 5e-6, 0.3, 0.5, 5e-6, 1.0, 1.0}));
  EXPECT_LT(y[0], 0.0);
  EXPECT_LT(y[1], 0.0);
  Rng rng(1);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto pin = b.sample_pin(i, rng);
    const auto& c = std::get<LinearConstraint>(pin.constraints.at(0));
    EXPECT_EQ(c.terms.at(0).var, VarRef::label_of(0, (i / 2) % 5));
  }
}

TEST(Registry, KnownAndUnknownNames) {
  for (const auto& n : problem_names()) EXPECT_EQ(make_problem(n)->name(), n);
  try {
    (void)make_problem("zdt1");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("zdt1"), std::string::npos);
    EXPECT_NE(msg.find("available: fonseca_fleming"), std::string::npos);
  }
}

TEST(Registry, ProblemFiles) {
  const std::string data = TREEMOO_DATA_DIR "/windfarm/";
  const auto good = temp_file("wf.json", R"({"problem": "windfarm", "wind_rose": ")" + data +
                                             R"(wind_rose.tsv", "turbine": ")" + data +
                                             R"(turbine.tsv"})");
  EXPECT_EQ(load_problem_file(good)->name(), "windfarm");
  EXPECT_EQ(load_problem_file(temp_file("s.json", R"({"problem": "schaffer"})"))->name(),
            "schaffer");
  EXPECT_THROW((void)load_problem_file(temp_file("x.json", R"({"problem": "schaffer", "k": 1})")),
               Error);
  EXPECT_THROW((void)load_problem_file(temp_file("y.json", R"({"problem": "schaffer",
      "wind_rose": "a", "turbine": "b"})")),
               Error);
  EXPECT_THROW((void)load_problem_file(temp_file("z.json", R"({"name": "schaffer"})")), Error);
}
