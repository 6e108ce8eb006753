#pragma once

// Multi-objective Bayesian optimization loop: per iteration, train one tree
// ensemble per objective, draw Chebyshev weights, solve the acquisition MIQP
// and evaluate the proposal.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "treemoo/acquisition.hpp"
#include "treemoo/encode.hpp"
#include "treemoo/gbrt.hpp"
#include "treemoo/initial_design.hpp"
#include "treemoo/problem.hpp"
#include "treemoo/record.hpp"
#include "treemoo/similarity.hpp"
#include "treemoo/solver.hpp"

namespace treemoo {

/// Solver settings for optimization runs. The node limit replaces the wall
/// clock limit so that seeded runs do not depend on machine speed.
inline SolveConfig default_run_solve_config() {
  SolveConfig c;
  c.node_limit = 2000;
  c.time_limit_secs = 1e9;
  return c;
}

struct OptimizerConfig {
  std::size_t budget = 80;
  std::size_t n_initial = 10;
  double kappa = kDefaultKappa;
  GbrtConfig gbrt;
  SolveConfig solve = default_run_solve_config();
  SolveConfig sampler = default_sampler_config();
  SimilarityMeasure similarity = SimilarityMeasure::Goodall4;
  std::optional<NormalizationBounds> objective_bounds;
  std::size_t max_no_good = 20;

  void validate() const {
    if (n_initial < 1) throw Error("optimizer: n_initial must be >= 1");
    if (budget < n_initial) throw Error("optimizer: budget must be >= n_initial");
    if (!(kappa >= 0.0)) throw Error("optimizer: kappa must be >= 0");
    gbrt.validate();
    solve.validate();
  }
};

/// Independent uniforms normalized by their sum.
inline std::vector<double> sample_weights(std::size_t n_f, Rng& rng) {
  require(n_f >= 1, "sample_weights: n_f must be >= 1");
  if (n_f == 1) return {1.0};
  std::vector<double> w(n_f);
  double s = 0.0;
  for (auto& v : w) s += (v = rng.uniform());
  if (s == 0.0) return std::vector<double>(n_f, 1.0 / static_cast<double>(n_f));
  for (auto& v : w) v /= s;
  return w;
}

struct Proposal {
  Point point;
  std::vector<double> weights;
  SolveResult solve;
  std::size_t no_good_cuts = 0;
};

/// Builds the acquisition problem for the current data and weights.
inline AcquisitionProblem build_acquisition(const DataSet& data, const DesignSpace& space,
                                            const OptimizerConfig& cfg,
                                            const std::vector<double>& weights) {
  data.validate(space);
  std::vector<TreeEnsemble> ens;
  for (std::size_t o = 0; o < data.num_objectives(); ++o)
    ens.push_back(train_gbrt(space, data, o, cfg.gbrt));
  return make_chebyshev_problem(space, std::move(ens), data, weights, cfg.kappa,
                                make_similarity(space, data, cfg.similarity),
                                observed_bounds(data, cfg.objective_bounds));
}

inline Proposal propose(const DataSet& data, const DesignSpace& space, const OptimizerConfig& cfg,
                        Rng& rng) {
  if (data.empty()) throw Error("propose: the dataset is empty");
  Proposal out;
  out.weights = sample_weights(data.num_objectives(), rng);
  AcquisitionProblem prob = build_acquisition(data, space, cfg, out.weights);
  SolveConfig sc = cfg.solve;
  sc.seed = rng.next();
  while (true) {
    const auto enc = encode(prob);
    out.solve = solve(enc, sc);
    if (!out.solve.point) {
      if (out.no_good_cuts == 0)
        throw Error("propose: the design space constraints are unsatisfiable");
      break;  // every remaining cell was cut; keep the last duplicate
    }
    out.point = Point(out.solve.point->values);
    if (!data.contains(out.point) || out.no_good_cuts >= cfg.max_no_good) break;
    prob.excluded.push_back(prob.signature(out.point));
    ++out.no_good_cuts;
  }
  return out;
}

/// Runs the optimizer for `cfg.budget` evaluations. `initial` overrides the
/// generated initial design (it must hold cfg.n_initial points).
inline RunOutput run_entmoot(const Problem& problem, const OptimizerConfig& cfg,
                             std::uint64_t seed,
                             const std::optional<std::vector<Point>>& initial = std::nullopt,
    const IterationSink& sink = {}) {
  cfg.validate();
  const auto init =
      initial ? *initial : make_initial_design(problem, cfg.n_initial, seed, cfg.sampler);
  if (init.size() != cfg.n_initial) throw Error("initial design size differs from n_initial");

  RunSession run(problem, "entmoot", seed, sink);
  Rng rng(seed ^ 0x6a09e667f3bcc909ULL);
  for (const auto& p : init) {
    IterationRecord it;
    it.phase = "initial";
    it.point = p;
    run.commit(std::move(it));
  }
  while (run.size() < cfg.budget) {
    const Proposal prop = propose(run.data(), problem.space(), cfg, rng);
    IterationRecord it;
    it.phase = "proposal";
    it.point = prop.point;
    it.weights = prop.weights;
    it.solver_status = to_string(prop.solve.status);
    it.solver_gap = prop.solve.gap;
    it.acquisition = prop.solve.objective;
    it.solver_nodes = prop.solve.nodes;
    run.commit(std::move(it));
  }
  return run.finish();
}

}  // namespace treemoo
