#pragma once

// Feasible random baseline: the shared initial design followed by further
// max-min samples with the problem's rotating pins.

#include <optional>
#include <vector>

#include "treemoo/initial_design.hpp"
#include "treemoo/record.hpp"

namespace treemoo {

struct RandomConfig {
  std::size_t budget = 80;
  std::size_t n_initial = 10;
  SolveConfig sampler = default_sampler_config();
};

inline RunOutput random_feasible_run(const Problem& problem, const RandomConfig& cfg,
                                     std::uint64_t seed,
                                     const std::optional<std::vector<Point>>& initial = std::nullopt,
    const IterationSink& sink = {}) {
  if (cfg.budget < cfg.n_initial) throw Error("random: budget must be >= n_initial");
  std::vector<Point> pts =
      initial ? *initial : make_initial_design(problem, cfg.n_initial, seed, cfg.sampler);
  if (pts.size() != cfg.n_initial) throw Error("initial design size differs from n_initial");

  RunSession run(problem, "random", seed, sink);
  for (const auto& p : pts) {
    IterationRecord it;
    it.phase = "initial";
    it.point = p;
    run.commit(std::move(it));
  }
  Rng rng(seed ^ 0xbb67ae8584caa73bULL);
  const PinFn pin = [&](std::size_t i, Rng& r) { return problem.sample_pin(i, r); };
  while (run.size() < cfg.budget) {
    extend_maxmin(problem.space(), pts, 1, pts.size(), pin, rng, cfg.sampler);
    IterationRecord it;
    it.phase = "sample";
    it.point = pts.back();
    run.commit(std::move(it));
  }
  return run.finish();
}

}  // namespace treemoo
