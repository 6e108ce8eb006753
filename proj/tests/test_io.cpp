#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "support/fixtures.hpp"
#include "treemoo/bench/battery.hpp"
#include "treemoo/bench/windfarm.hpp"
#include "treemoo/io.hpp"
#include "treemoo/optimizer.hpp"

using namespace treemoo;
namespace tt = treemoo::testing;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "treemoo_test_io";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Io, SpaceRoundTrip) {
  for (const auto& s : {bench::windfarm_space(bench::WindfarmModel::defaults(), true),
                        bench::battery_space()}) {
    const json j = io::to_json(s);
    const auto back = io::space_from_json(j);
    EXPECT_EQ(io::to_json(back), j);
    EXPECT_EQ(back.size(), s.size());
    EXPECT_EQ(back.aux.size(), s.aux.size());
    EXPECT_EQ(back.constraints.size(), s.constraints.size());
  }
}

TEST(Io, SpaceErrorsNameTheProblem) {
  const json j = {{"schema", "treemoo.space/1"},
                  {"features", {{{"name", "x"}, {"type", "continuous"}, {"lower", 0}, {"upper", 1}}}},
                  {"constraints",
                   {{{"name", "c"},
                     {"type", "linear"},
                     {"terms", {{"y", 1}}},
                     {"sense", "<="},
                     {"rhs", 1}}}}};
  EXPECT_NE(error_of([&] { (void)io::space_from_json(j); }).find("y"), std::string::npos);
  json wrong = j;
  wrong["schema"] = "treemoo.data/1";
  EXPECT_NE(error_of([&] { (void)io::space_from_json(wrong); }).find("schema"), std::string::npos);
}

TEST(Io, PointsUseLabelNames) {
  const auto s = bench::battery_space();
  const Point p({3, 2.0, 0.3, 0.5, 5e-6, 0.3, 0.5, 5e-6, 1.0, 1.0});
  const json j = io::point_json(s, p);
  EXPECT_EQ(j[0], "Marquis2019");
  EXPECT_EQ(io::point_from_json(s, j).values, p.values);
  json bad = j;
  bad[0] = "Nope2000";
  EXPECT_THROW((void)io::point_from_json(s, bad), Error);
}

TEST(Io, EnsembleAndDatasetRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto fx = tt::random_fixture(seed, 1.96);
    const auto data = io::dataset_from_json(fx.space, io::to_json(fx.space, fx.data));
    EXPECT_EQ(data.targets, fx.data.targets);
    ASSERT_EQ(data.size(), fx.data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
      EXPECT_EQ(data.points[i].values, fx.data.points[i].values);
    for (const auto& e : fx.problem.ensembles) {
      const auto back = io::ensemble_from_json(io::to_json(e));
      EXPECT_NO_THROW(back.validate());
      Rng rng(seed);
      for (int k = 0; k < 30; ++k) {
        const auto p = tt::random_point(rng, fx.space);
        EXPECT_EQ(back.predict(p), e.predict(p));
      }
    }
  }
}

TEST(Io, FixtureReproducesTheAcquisition) {
  const auto fx = tt::random_fixture(5, 1.5);
  json j{{"schema", "treemoo.fixture/1"},
         {"space", io::to_json(fx.space)},
         {"data", io::to_json(fx.space, fx.data)},
         {"ensembles", json::array()},
         {"weights", fx.problem.weights},
         {"kappa", 1.5},
         {"similarity", to_string(fx.problem.similarity.measure())},
         {"solve", {{"node_limit", 100}}}};
  for (const auto& e : fx.problem.ensembles) j["ensembles"].push_back(io::to_json(e));
  const auto back = io::fixture_from_json(j);
  EXPECT_EQ(back.solve.node_limit, 100u);
  Rng rng(1);
  for (int k = 0; k < 30; ++k) {
    const auto p = tt::random_point(rng, fx.space);
    EXPECT_DOUBLE_EQ(back.problem.value(p), fx.problem.value(p));
  }
  j["solve"] = {{"node_limt", 100}};
  EXPECT_NE(error_of([&] { (void)io::fixture_from_json(j); }).find("node_limt"),
            std::string::npos);
}

TEST(Io, RecordRoundTrip) {
  RunRecord r;
  r.problem = "schaffer";
  r.optimizer = "entmoot";
  r.seed = 17;
  IterationRecord a;
  a.index = 0;
  a.phase = "initial";
  a.point = Point({0.5});
  a.y = {0.25, 2.25};
  a.hypervolume = 12.5;
  IterationRecord b = a;
  b.index = 1;
  b.phase = "proposal";
  b.failed = true;
  b.feasible = false;
  b.violation = 0.125;
  b.weights = {0.3, 0.7};
  b.solver_status = "optimal";
  b.solver_gap = 0.0;
  b.acquisition = -1.0 / 3.0;
  b.solver_nodes = 42;
  const auto path = temp_path("rec.jsonl");
  {
    io::RecordWriter w(path, r, {{"budget", 2}});
    w.append(a);
    w.append(b);
  }
  const auto back = io::read_record(path);
  EXPECT_EQ(back.record.problem, "schaffer");
  EXPECT_EQ(back.record.seed, 17u);
  EXPECT_EQ(back.config.at("budget"), 2);
  ASSERT_EQ(back.record.iterations.size(), 2u);
  const auto& a2 = back.record.iterations[0];
  const auto& b2 = back.record.iterations[1];
  EXPECT_EQ(a2.point.values, a.point.values);
  EXPECT_EQ(a2.y, a.y);
  EXPECT_TRUE(std::isnan(a2.solver_gap));
  EXPECT_TRUE(a2.solver_status.empty());
  EXPECT_EQ(b2.weights, b.weights);
  EXPECT_EQ(b2.acquisition, b.acquisition);
  EXPECT_EQ(b2.solver_nodes, 42u);
  EXPECT_TRUE(b2.failed);
  EXPECT_FALSE(b2.feasible);
  EXPECT_EQ(b2.violation, 0.125);
  EXPECT_EQ(io::to_json(b2), io::to_json(b));
}

TEST(Io, NanIsWrittenAsNull) {
  IterationRecord it;
  it.y = {1.0, 2.0};
  const json j = io::to_json(it);
  EXPECT_TRUE(j.at("hv").is_null());
  EXPECT_EQ(j.dump().find("nan"), std::string::npos);
}

TEST(Io, RecordErrorsCarryTheLine) {
  const auto path = temp_path("bad.jsonl");
  io::write_file(path,
                 R"({"schema":"treemoo.record/1","problem":"p","optimizer":"o","seed":1})"
                 "\n{\"i\": 0,\n");
  EXPECT_NE(error_of([&] { (void)io::read_record(path); }).find("bad.jsonl:2"), std::string::npos);
  io::write_file(path, R"({"schema":"treemoo.front/1"})" "\n");
  EXPECT_NE(error_of([&] { (void)io::read_record(path); }).find("schema"), std::string::npos);
}

TEST(Io, FrontRoundTripIsExact) {
  Rng rng(2);
  Front f;
  for (int i = 0; i < 50; ++i) f.push_back({rng.uniform(-1e3, 1e3), rng.uniform() * 1e-7});
  const auto path = temp_path("front.tsv");
  io::write_front(path, f);
  EXPECT_EQ(io::read_front(path), f);
  io::write_file(path, "# treemoo.front/1\n1\t2\n3\n");
  EXPECT_NE(error_of([&] { (void)io::read_front(path); }).find(":3"), std::string::npos);
}

TEST(Io, SyntaxErrorsReportLineAndColumn) {
  const std::string msg =
      error_of([] { (void)io::parse_text("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json"); });
  EXPECT_NE(msg.find("cfg.json:3:"), std::string::npos) << msg;
  EXPECT_NE(error_of([] { (void)io::read_json("/nonexistent/cfg.json"); }).find("cannot open"),
            std::string::npos);
}

TEST(Io, ConfigUpdatesRejectUnknownKeys) {
  GbrtConfig g;
  io::update_from_json(g, {{"num_trees", 50}, {"max_depth", 2}}, "gbrt");
  EXPECT_EQ(g.num_trees, 50u);
  EXPECT_EQ(g.max_depth, 2u);
  EXPECT_THROW(io::update_from_json(g, {{"trees", 5}}, "gbrt"), Error);
  SolveConfig s;
  io::update_from_json(s, io::to_json(default_run_solve_config()), "solve");
  EXPECT_EQ(s.node_limit, 2000u);
}
