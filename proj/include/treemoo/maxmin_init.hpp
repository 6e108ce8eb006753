#pragma once

// Feasible space-filling sampler: each new point maximizes the normalized
// Manhattan distance (plus label mismatches) to the closest earlier sample,
// subject to the design-space constraints and a per-point pin.

#include <functional>
#include <string>
#include <vector>

#include "treemoo/acquisition.hpp"
#include "treemoo/encode.hpp"
#include "treemoo/problem.hpp"
#include "treemoo/solver.hpp"

namespace treemoo {

using PinFn = std::function<Pin(std::size_t index, Rng& rng)>;

inline DesignSpace with_pin(const DesignSpace& space, const Pin& pin) {
  DesignSpace s = space;
  for (const auto& c : pin.constraints) s.add_constraint(c);
  s.validate();
  return s;
}

/// One max-min sample. `index` only labels errors.
inline Point maxmin_sample(const DesignSpace& space, const std::vector<Point>& samples,
                           const Pin& pin, const SolveConfig& cfg, std::size_t index) {
  const auto prob = make_maxmin_problem(with_pin(space, pin), samples);
  const auto enc = encode(prob);
  const auto res = solve(enc, cfg);
  if (!res.point)
    throw Error("max-min sampler: pinned assignment for point " + std::to_string(index) +
                " is infeasible");
  Point p(res.point->values);
  for (const auto& q : samples)
    if (q == p)
      throw Error("max-min sampler: no point distinct from the samples for point " +
                  std::to_string(index));
  return p;
}

/// Appends `count` samples to `samples`; sample k gets pin(first_index + k).
inline void extend_maxmin(const DesignSpace& space, std::vector<Point>& samples, std::size_t count,
                          std::size_t first_index, const PinFn& pin, Rng& rng,
                          const SolveConfig& cfg) {
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = first_index + k;
    const Pin p = pin ? pin(idx, rng) : Pin{};
    samples.push_back(maxmin_sample(space, samples, p, cfg, idx));
  }
}

inline std::vector<Point> feasible_maxmin_init(const DesignSpace& space, std::size_t n_points,
                                               const PinFn& pin, Rng& rng,
                                               const SolveConfig& cfg = {}) {
  std::vector<Point> out;
  extend_maxmin(space, out, n_points, 0, pin, rng, cfg);
  return out;
}

/// Solver settings for sampling: the node limit keeps the result
/// independent of machine speed.
inline SolveConfig default_sampler_config() {
  SolveConfig c;
  c.node_limit = 200;
  c.time_limit_secs = 1e9;
  c.heuristic_evals = 2000;
  c.heuristic_assignments = 8;
  return c;
}

}  // namespace treemoo
