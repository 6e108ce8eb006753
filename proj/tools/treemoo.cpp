// treemoo command-line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treemoo/bench/registry.hpp"
#include "treemoo/experiment.hpp"
#include "treemoo/io.hpp"
#include "treemoo/maxmin_init.hpp"

namespace {

using namespace treemoo;
using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs `f` and maps treemoo errors to ConfigError.
template <class F>
auto config_step(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  // "101,102" or "101-107"
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dash = tok.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(tok));
      } else {
        const auto a = std::stoull(tok.substr(0, dash));
        const auto b = std::stoull(tok.substr(dash + 1));
        if (b < a) throw ConfigError("seed range '" + tok + "' is descending");
        for (auto s = a; s <= b; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed list '" + text + "'");
    }
  }
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    io::write_file(path, text);
}

struct RunArgs {
  std::string config;
  std::string problem;
  std::vector<std::string> optimizers;
  std::string seeds;
  std::size_t budget = 0;
  std::size_t n_initial = 0;
  std::string output;
  std::size_t workers = 0;
};

int cmd_run(const RunArgs& a) {
  ExperimentConfig cfg = config_step([&] {
    ExperimentConfig c = a.config.empty() ? ExperimentConfig{} : load_experiment(a.config);
    if (!a.problem.empty()) {
      c.problem = a.problem;
      c.problem_file.clear();
    }
    if (!a.optimizers.empty()) c.optimizers = a.optimizers;
    if (!a.seeds.empty()) c.seeds = parse_seeds(a.seeds);
    if (a.budget) c.budget = a.budget;
    if (a.n_initial) c.n_initial = a.n_initial;
    if (!a.output.empty()) c.output = a.output;
    c.validate();
    (void)c.make_problem();
    return c;
  });
  const std::size_t workers = a.workers ? a.workers : config_step(workers_from_env);
  const auto cells = run_experiment(cfg, workers, &std::cerr);
  for (const auto& c : cells)
    if (!c.error.empty()) return 2;
  std::cout << "wrote " << cells.size() << " record(s) to " << cfg.output << "\n";
  return 0;
}

struct ReportArgs {
  std::vector<std::string> records;
  std::string true_front;
  std::vector<std::size_t> checkpoints{10, 20, 40, 60, 80};
  std::string output;
};

int cmd_report(const ReportArgs& a) {
  ReportOptions opt;
  opt.checkpoints = a.checkpoints;
  opt.output = a.output;
  const auto paths = config_step([&] { return expand_record_paths(a.records); });
  if (!a.true_front.empty()) opt.truth = config_step([&] { return io::read_front(a.true_front); });
  std::vector<io::LoadedRecord> recs;
  for (const auto& p : paths) recs.push_back(io::read_record(p));
  const auto t = make_report(recs, opt, &std::cerr);
  std::cout << t.summary;
  return 0;
}

int cmd_truefront(const std::string& problem, std::size_t samples, const std::string& output) {
  auto p = config_step([&] {
    auto s = bench::make_synthetic(problem);
    if (!s) {
      bench::make_problem(problem);  // unknown names list the available problems
      throw Error("problem '" + problem + "' has no analytic front");
    }
    if (samples == 0) throw Error("sample count must be positive");
    return s;
  });
  std::ostringstream out;
  io::write_front(out, bench::true_front(*p, samples));
  write_output(output, out.str());
  return 0;
}

struct InitArgs {
  std::string problem;
  std::string space;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_init_sample(const InitArgs& a) {
  std::unique_ptr<Problem> problem;
  DesignSpace space = config_step([&] {
    if (a.problem.empty() == a.space.empty())
      throw Error("give exactly one of --problem and --space");
    if (!a.problem.empty()) {
      problem = bench::make_problem(a.problem);
      return problem->space();
    }
    return io::space_from_json(io::read_json(a.space));
  });
  const std::size_t n = a.n ? a.n : (problem ? problem->default_initial() : 10);
  Rng rng(a.seed);
  PinFn pin;
  if (problem) pin = [&](std::size_t i, Rng& r) { return problem->sample_pin(i, r); };
  const auto pts = feasible_maxmin_init(space, n, pin, rng, default_sampler_config());
  json j{{"schema", "treemoo.points/1"}, {"seed", a.seed}, {"points", json::array()}};
  for (const auto& p : pts) j["points"].push_back(io::point_json(space, p));
  write_output(a.output, j.dump(2) + "\n");
  return 0;
}

int cmd_solve_fixture(const std::string& path, std::size_t node_limit, const std::string& output) {
  auto fx = config_step([&] { return io::fixture_from_json(io::read_json(path)); });
  if (node_limit) fx.solve.node_limit = node_limit;
  const auto enc = encode(fx.problem);
  const auto res = solve(enc, fx.solve);
  json j{{"schema", "treemoo.solution/1"},
         {"status", to_string(res.status)},
         {"objective", io::num(res.objective)},
         {"bound", io::num(res.bound)},
         {"gap", io::num(res.gap)},
         {"nodes", res.nodes}};
  if (res.point) {
    j["point"] = io::point_json(fx.problem.space, *res.point);
    if (fx.problem.mode == AcquisitionMode::Chebyshev) {
      json mu = json::array();
      for (const auto& e : fx.problem.ensembles) mu.push_back(e.predict(*res.point));
      j["predictions"] = mu;
      j["exploration"] = fx.problem.exploration(*res.point);
    }
  }
  write_output(output, j.dump(2) + "\n");
  return res.point ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-ensemble multi-objective Bayesian optimization"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run seeded experiments");
  run->add_option("config", run_args.config, "experiment file (JSON)");
  run->add_option("--problem", run_args.problem, "problem name (overrides the file)");
  run->add_option("--optimizer", run_args.optimizers, "entmoot, random or nsga2 (repeatable)");
  run->add_option("--seeds", run_args.seeds, "seed list, e.g. 101,102 or 101-107");
  run->add_option("--budget", run_args.budget, "evaluations per run");
  run->add_option("--n-initial", run_args.n_initial, "initial design size");
  run->add_option("--output", run_args.output, "output directory");
  run->add_option("--workers", run_args.workers, "parallel runs (default: TREEMOO_WORKERS or 1)");

  ReportArgs rep_args;
  auto* rep = app.add_subcommand("report", "metric tables from run records");
  rep->add_option("records", rep_args.records, "record files, run directories or manifests")
      ->required();
  rep->add_option("--true-front", rep_args.true_front, "true front file");
  rep->add_option("--checkpoints", rep_args.checkpoints, "evaluation counts")->delimiter(',');
  rep->add_option("--output", rep_args.output, "directory for summary, curve and front files");

  std::string tf_problem, tf_output;
  std::size_t tf_samples = 100000;
  auto* tf = app.add_subcommand("truefront", "dense-sample true front of a synthetic problem");
  tf->add_option("problem", tf_problem, "problem name")->required();
  tf->add_option("--samples", tf_samples, "number of samples");
  tf->add_option("--output", tf_output, "front file (default: stdout)");

  InitArgs init_args;
  auto* init = app.add_subcommand("init-sample", "feasible max-min initial design");
  init->add_option("--problem", init_args.problem, "problem name");
  init->add_option("--space", init_args.space, "design space file (JSON)");
  init->add_option("-n,--count", init_args.n, "number of points");
  init->add_option("--seed", init_args.seed, "random seed");
  init->add_option("--output", init_args.output, "output file (default: stdout)");

  std::string fx_path, fx_output;
  std::size_t fx_nodes = 0;
  auto* fx = app.add_subcommand("solve-fixture", "solve an acquisition fixture");
  fx->add_option("fixture", fx_path, "fixture file (JSON)")->required();
  fx->add_option("--node-limit", fx_nodes, "override the node limit");
  fx->add_option("--output", fx_output, "result file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*rep) return cmd_report(rep_args);
    if (*tf) return cmd_truefront(tf_problem, tf_samples, tf_output);
    if (*init) return cmd_init_sample(init_args);
    if (*fx) return cmd_solve_fixture(fx_path, fx_nodes, fx_output);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
