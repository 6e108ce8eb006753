#pragma once

// Batch experiments: configuration, seeded runs in a worker pool, and the
// report over saved run records.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "treemoo/bench/registry.hpp"
#include "treemoo/io.hpp"
#include "treemoo/metrics.hpp"
#include "treemoo/nsga2.hpp"
#include "treemoo/optimizer.hpp"
#include "treemoo/random_search.hpp"

namespace treemoo {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "treemoo.manifest/1";
inline constexpr const char* kReportSchema = "treemoo.report/1";

/// Experiment file schema (JSON):
///
///   problem        name from the registry, or
///   problem_file   path to a problem file (see bench/registry.hpp)
///   optimizers     list from {"entmoot", "random", "nsga2"} ("optimizer": one name)
///   seeds          list of integers, or {"first": 101, "count": 7}
///   budget         total evaluations per run
///   n_initial      initial design size (default: the problem's default)
///   output         output directory
///   entmoot        {kappa, similarity, max_no_good, gbrt: {...}, solver: {...},
///                   objective_bounds: {lo: [...], hi: [...]}}
///   nsga2          {crossover_prob, sbx_eta, mutation_prob, mutation_eta}
///   sampler        solver settings for the max-min sampler
///
/// Unknown keys are errors.
struct ExperimentConfig {
  std::string problem;
  std::string problem_file;
  std::vector<std::string> optimizers{"entmoot"};
  std::vector<std::uint64_t> seeds;
  std::size_t budget = 80;
  std::size_t n_initial = 0;  // 0: problem default
  std::string output = "runs";
  OptimizerConfig entmoot;
  NsgaConfig nsga;
  SolveConfig sampler = default_sampler_config();

  [[nodiscard]] std::unique_ptr<Problem> make_problem() const {
    if (!problem_file.empty()) return bench::load_problem_file(problem_file);
    return bench::make_problem(problem);
  }

  void validate() const {
    if (problem.empty() == problem_file.empty())
      throw Error("config: give exactly one of 'problem' and 'problem_file'");
    if (seeds.empty()) throw Error("config: 'seeds' must not be empty");
    if (optimizers.empty()) throw Error("config: no optimizer selected");
    for (const auto& o : optimizers)
      if (o != "entmoot" && o != "random" && o != "nsga2")
        throw Error("config: unknown optimizer '" + o + "' (entmoot, random, nsga2)");
    if (n_initial != 0 && budget < n_initial) throw Error("config: budget must be >= n_initial");
    if (output.empty()) throw Error("config: 'output' must not be empty");
    std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
    if (uniq.size() != seeds.size()) throw Error("config: duplicate seeds");
  }

  /// Full configuration with defaults filled in; echoed into records.
  [[nodiscard]] nlohmann::json echo() const {
    using io::to_json;
    nlohmann::json j;
    if (!problem.empty()) j["problem"] = problem;
    if (!problem_file.empty()) j["problem_file"] = problem_file;
    j["optimizers"] = optimizers;
    j["seeds"] = seeds;
    j["budget"] = budget;
    j["n_initial"] = n_initial;
    j["output"] = output;
    nlohmann::json e{{"kappa", entmoot.kappa},
                     {"similarity", to_string(entmoot.similarity)},
                     {"max_no_good", entmoot.max_no_good},
                     {"gbrt", to_json(entmoot.gbrt)},
                     {"solver", to_json(entmoot.solve)}};
    if (entmoot.objective_bounds)
      e["objective_bounds"] = {{"lo", entmoot.objective_bounds->lo},
                               {"hi", entmoot.objective_bounds->hi}};
    j["entmoot"] = e;
    j["nsga2"] = {{"crossover_prob", nsga.crossover_prob},
                  {"sbx_eta", nsga.sbx_eta},
                  {"mutation_prob", nsga.mutation_prob},
                  {"mutation_eta", nsga.mutation_eta}};
    j["sampler"] = to_json(sampler);
    return j;
  }
};

namespace detail {

template <class F>
void with_key(const std::string& key, F&& f) {
  try {
    f();
  } catch (const nlohmann::json::exception& e) {
    throw Error("config: field '" + key + "': " + e.what());
  }
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                           const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error("config: unknown key '" + where + k + "'");
}

}  // namespace detail

inline ExperimentConfig parse_experiment(const nlohmann::json& j) {
  using detail::with_key;
  if (!j.is_object()) throw Error("config: top level must be an object");
  detail::reject_unknown(j,
                         {"problem", "problem_file", "optimizer", "optimizers", "seeds", "budget",
                          "n_initial", "output", "entmoot", "nsga2", "sampler"},
                         "");
  ExperimentConfig c;
  with_key("problem", [&] { c.problem = j.value("problem", std::string()); });
  with_key("problem_file", [&] { c.problem_file = j.value("problem_file", std::string()); });
  if (j.contains("optimizer") && j.contains("optimizers"))
    throw Error("config: give 'optimizer' or 'optimizers', not both");
  with_key("optimizer", [&] {
    if (j.contains("optimizer")) c.optimizers = {j.at("optimizer").get<std::string>()};
  });
  with_key("optimizers", [&] {
    if (j.contains("optimizers")) c.optimizers = j.at("optimizers").get<std::vector<std::string>>();
  });
  with_key("seeds", [&] {
    if (!j.contains("seeds")) return;
    const auto& s = j.at("seeds");
    if (s.is_object()) {
      detail::reject_unknown(s, {"first", "count"}, "seeds.");
      const auto first = s.at("first").get<std::uint64_t>();
      const auto count = s.at("count").get<std::size_t>();
      for (std::size_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
    } else {
      c.seeds = s.get<std::vector<std::uint64_t>>();
    }
  });
  with_key("budget", [&] { c.budget = j.value("budget", c.budget); });
  with_key("n_initial", [&] { c.n_initial = j.value("n_initial", c.n_initial); });
  with_key("output", [&] { c.output = j.value("output", c.output); });
  if (j.contains("entmoot")) {
    const auto& e = j.at("entmoot");
    detail::reject_unknown(
        e, {"kappa", "similarity", "max_no_good", "gbrt", "solver", "objective_bounds"},
        "entmoot.");
    with_key("entmoot.kappa", [&] { c.entmoot.kappa = e.value("kappa", c.entmoot.kappa); });
    with_key("entmoot.similarity", [&] {
      if (e.contains("similarity"))
        c.entmoot.similarity = parse_similarity(e.at("similarity").get<std::string>());
    });
    with_key("entmoot.max_no_good",
             [&] { c.entmoot.max_no_good = e.value("max_no_good", c.entmoot.max_no_good); });
    with_key("entmoot.gbrt", [&] {
      if (e.contains("gbrt")) io::update_from_json(c.entmoot.gbrt, e.at("gbrt"), "config: entmoot.gbrt");
    });
    with_key("entmoot.solver", [&] {
      if (e.contains("solver"))
        io::update_from_json(c.entmoot.solve, e.at("solver"), "config: entmoot.solver");
    });
    with_key("entmoot.objective_bounds", [&] {
      if (!e.contains("objective_bounds")) return;
      const auto& b = e.at("objective_bounds");
      c.entmoot.objective_bounds = NormalizationBounds{b.at("lo").get<std::vector<double>>(),
                                                       b.at("hi").get<std::vector<double>>()};
    });
  }
  if (j.contains("nsga2")) {
    const auto& n = j.at("nsga2");
    detail::reject_unknown(n, {"crossover_prob", "sbx_eta", "mutation_prob", "mutation_eta"},
                           "nsga2.");
    with_key("nsga2", [&] {
      c.nsga.crossover_prob = n.value("crossover_prob", c.nsga.crossover_prob);
      c.nsga.sbx_eta = n.value("sbx_eta", c.nsga.sbx_eta);
      c.nsga.mutation_prob = n.value("mutation_prob", c.nsga.mutation_prob);
      c.nsga.mutation_eta = n.value("mutation_eta", c.nsga.mutation_eta);
    });
  }
  with_key("sampler", [&] {
    if (j.contains("sampler")) io::update_from_json(c.sampler, j.at("sampler"), "config: sampler");
  });
  return c;
}

/// Reads an experiment file; a relative problem_file is taken relative to
/// the experiment file's directory.
inline ExperimentConfig load_experiment(const std::string& path) {
  auto c = parse_experiment(io::read_json(path));
  if (!c.problem_file.empty() && std::filesystem::path(c.problem_file).is_relative())
    c.problem_file = (std::filesystem::path(path).parent_path() / c.problem_file).string();
  return c;
}

/// Worker count from TREEMOO_WORKERS (default 1).
inline std::size_t workers_from_env() {
  const char* v = std::getenv("TREEMOO_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw Error("TREEMOO_WORKERS must be a positive integer");
  return static_cast<std::size_t>(n);
}

/// Runs one (optimizer, seed) cell. All optimizers share the initial design
/// for a given seed.
inline RunOutput run_cell(const Problem& problem, const ExperimentConfig& cfg,
                          const std::string& optimizer, std::uint64_t seed,
                          const IterationSink& sink = {}) {
  const std::size_t n_init = cfg.n_initial ? cfg.n_initial : problem.default_initial();
  if (cfg.budget < n_init) throw Error("budget is smaller than the initial design");
  if (optimizer == "entmoot") {
    OptimizerConfig oc = cfg.entmoot;
    oc.budget = cfg.budget;
    oc.n_initial = n_init;
    oc.sampler = cfg.sampler;
    if (!oc.objective_bounds) oc.objective_bounds = problem.objective_bounds();
    return run_entmoot(problem, oc, seed, std::nullopt, sink);
  }
  if (optimizer == "random") {
    RandomConfig rc{cfg.budget, n_init, cfg.sampler};
    return random_feasible_run(problem, rc, seed, std::nullopt, sink);
  }
  if (optimizer == "nsga2") {
    NsgaConfig nc = cfg.nsga;
    nc.budget = cfg.budget;
    nc.population = n_init;
    nc.sampler = cfg.sampler;
    return nsga2_run(problem, nc, seed, std::nullopt, sink);
  }
  throw Error("unknown optimizer '" + optimizer + "'");
}

inline std::string record_file_name(const std::string& optimizer, std::uint64_t seed) {
  return optimizer + "_" + std::to_string(seed) + ".jsonl";
}

struct CellResult {
  std::string optimizer;
  std::uint64_t seed = 0;
  std::string path;
  double wall_seconds = 0.0;
  std::string error;  // empty on success
};

/// Runs every (optimizer, seed) cell and writes one record per cell, a
/// manifest and a timings file. Records carry no timing so that repeated
/// runs are byte-identical; wall times go to timings.tsv.
inline std::vector<CellResult> run_experiment(const ExperimentConfig& cfg, std::size_t workers,
                                              std::ostream* log = nullptr) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output);
  const auto echo = cfg.echo();
  std::string problem_name = cfg.make_problem()->name();

  std::vector<CellResult> cells;
  for (const auto& o : cfg.optimizers)
    for (auto s : cfg.seeds) {
      CellResult c;
      c.optimizer = o;
      c.seed = s;
      c.path = (fs::path(cfg.output) / record_file_name(o, s)).string();
      cells.push_back(std::move(c));
    }

  std::mutex log_mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cells.size();) {
      auto& cell = cells[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto problem = cfg.make_problem();
        RunRecord header{problem->name(), cell.optimizer, cell.seed, {}};
        io::RecordWriter writer(cell.path, header, echo);
        run_cell(*problem, cfg, cell.optimizer, cell.seed,
                 [&](const IterationRecord& it) { writer.append(it); });
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (log) {
        std::lock_guard lock(log_mu);
        *log << cell.optimizer << " seed " << cell.seed << ": "
             << (cell.error.empty() ? "done" : "FAILED: " + cell.error) << " (" << std::fixed
             << std::setprecision(1) << cell.wall_seconds << " s)\n";
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::max<std::size_t>(1, std::min(workers, cells.size())); ++w)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  nlohmann::json manifest{{"schema", kManifestSchema},
                          {"version", kVersion},
                          {"problem", problem_name},
                          {"config", echo},
                          {"timings", "timings.tsv"},
                          {"records", nlohmann::json::array()}};
  std::ostringstream timings;
  timings << "# treemoo.timings/1\noptimizer\tseed\twall_seconds\tstatus\n";
  for (const auto& c : cells) {
    manifest["records"].push_back({{"optimizer", c.optimizer},
                                   {"seed", c.seed},
                                   {"file", fs::path(c.path).filename().string()},
                                   {"ok", c.error.empty()}});
    timings << c.optimizer << '\t' << c.seed << '\t' << std::fixed << std::setprecision(3)
            << c.wall_seconds << '\t' << (c.error.empty() ? "ok" : "failed") << '\n';
  }
  io::write_file((fs::path(cfg.output) / "manifest.json").string(), manifest.dump(2) + "\n");
  io::write_file((fs::path(cfg.output) / "timings.tsv").string(), timings.str());
  return cells;
}

// ---- report ---------------------------------------------------------------

struct Quartiles {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
};

/// Linear-interpolation quantiles of the finite values; NaN when none.
inline Quartiles quartiles(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || v[lo] == v[hi]) return v[lo];
    return v[lo] + frac * (v[hi] - v[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

/// Feasible, non-failed objective vectors among the first k evaluations,
/// reduced to the non-dominated set.
inline Front prefix_front(const RunRecord& r, std::size_t k) {
  ParetoArchive a;
  for (std::size_t i = 0; i < k && i < r.iterations.size(); ++i) {
    const auto& it = r.iterations[i];
    if (it.feasible && !it.failed) a.insert(it.point, it.y);
  }
  return a.front();
}

struct ReportOptions {
  std::vector<std::size_t> checkpoints{10, 20, 40, 60, 80};
  std::optional<Front> truth;  // minimized units
  std::string output;          // directory; empty: tables only
};

struct ReportTables {
  std::string summary;   // one row per (checkpoint, optimizer)
  std::string hv_curve;  // hypervolume quartiles per evaluation count
  std::map<std::string, Front> best_fronts;  // per optimizer, report units
};

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

}  // namespace detail

/// Metric tables over records of one problem. GD, IGD and MPFE are given
/// x100 in raw objective units; VR needs the true front.
inline ReportTables make_report(const std::vector<io::LoadedRecord>& records,
                                const ReportOptions& opt, std::ostream* warn = &std::cerr) {
  if (records.empty()) throw Error("report: no records");
  const std::string problem = records.front().record.problem;
  for (const auto& r : records)
    if (r.record.problem != problem)
      throw Error("report: records mix problems '" + problem + "' and '" + r.record.problem + "'");

  std::vector<double> signs, ref;
  try {
    const auto p = bench::make_problem(problem);
    signs = p->report_signs();
    ref = p->reference_point();
  } catch (const Error&) {
    if (opt.truth) throw;
  }

  std::map<std::string, std::vector<const RunRecord*>> by_opt;
  std::size_t max_len = 0;
  for (const auto& r : records) {
    by_opt[r.record.optimizer].push_back(&r.record);
    max_len = std::max(max_len, r.record.iterations.size());
  }

  ReportTables t;
  std::ostringstream s;
  s << "# " << kReportSchema << " problem=" << problem << '\n';
  s << "itr\toptimizer\truns";
  for (const char* m : {"gd_x100", "igd_x100", "mpfe_x100", "vr", "hv"})
    s << '\t' << m << "_median\t" << m << "_q1\t" << m << "_q3";
  s << '\n';
  for (std::size_t k : opt.checkpoints) {
    if (k == 0) continue;
    bool any = false;
    for (const auto& [name, runs] : by_opt) {
      std::vector<double> gdv, igdv, mpfev, vrv, hvv;
      for (const RunRecord* r : runs) {
        if (r->iterations.size() < k) continue;
        hvv.push_back(r->iterations[k - 1].hypervolume);
        if (!opt.truth) continue;
        const Front f = prefix_front(*r, k);
        if (f.empty()) {
          vrv.push_back(0.0);
          continue;
        }
        gdv.push_back(100.0 * gd(f, *opt.truth));
        igdv.push_back(100.0 * igd(f, *opt.truth));
        mpfev.push_back(100.0 * mpfe(f, *opt.truth));
        if (ref.size() == 2) vrv.push_back(vr(f, *opt.truth, ref, warn));
      }
      if (hvv.empty()) continue;
      any = true;
      s << k << '\t' << name << '\t' << hvv.size();
      for (const auto* v : {&gdv, &igdv, &mpfev, &vrv, &hvv}) {
        const auto q = quartiles(*v);
        s << '\t' << detail::fmt(q.median) << '\t' << detail::fmt(q.q1) << '\t'
          << detail::fmt(q.q3);
      }
      s << '\n';
    }
    if (!any && warn) *warn << "warning: checkpoint " << k << " exceeds every run; omitted\n";
  }
  t.summary = s.str();

  std::ostringstream h;
  h << "# " << kReportSchema << " problem=" << problem << '\n';
  h << "evaluations\toptimizer\truns\thv_median\thv_q1\thv_q3\n";
  for (const auto& [name, runs] : by_opt) {
    for (std::size_t e = 1; e <= max_len; ++e) {
      std::vector<double> v;
      for (const RunRecord* r : runs)
        if (r->iterations.size() >= e) v.push_back(r->iterations[e - 1].hypervolume);
      if (v.empty()) continue;
      const auto q = quartiles(v);
      h << e << '\t' << name << '\t' << v.size() << '\t' << detail::fmt(q.median) << '\t'
        << detail::fmt(q.q1) << '\t' << detail::fmt(q.q3) << '\n';
    }
  }
  t.hv_curve = h.str();

  for (const auto& [name, runs] : by_opt) {
    ParetoArchive a;
    for (const RunRecord* r : runs)
      for (const auto& y : prefix_front(*r, r->iterations.size())) a.insert(Point{}, y);
    Front f = a.front();
    for (auto& y : f)
      for (std::size_t j = 0; j < y.size() && j < signs.size(); ++j) y[j] *= signs[j];
    std::sort(f.begin(), f.end());
    t.best_fronts[name] = std::move(f);
  }

  if (!opt.output.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.output);
    io::write_file((fs::path(opt.output) / "summary.tsv").string(), t.summary);
    io::write_file((fs::path(opt.output) / "hv_curve.tsv").string(), t.hv_curve);
    for (const auto& [name, f] : t.best_fronts)
      io::write_front((fs::path(opt.output) / ("front_" + name + ".tsv")).string(), f);
  }
  return t;
}

/// Record files named in a manifest, or the .jsonl files of a directory,
/// or the path itself.
inline std::vector<std::string> expand_record_paths(const std::vector<std::string>& inputs) {
  namespace fs = std::filesystem;
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.path().extension() == ".jsonl") found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (p.filename() == "manifest.json") {
      const auto m = io::read_json(in);
      for (const auto& r : m.at("records"))
        if (r.at("ok").get<bool>())
          out.push_back((p.parent_path() / r.at("file").get<std::string>()).string());
    } else {
      out.push_back(in);
    }
  }
  if (out.empty()) throw Error("report: no record files found");
  return out;
}

}  // namespace treemoo
