#pragma once

// Initial designs shared by the optimizer and both baselines, so that every
// optimizer started with the same seed sees the same first points.

#include <string>
#include <vector>

#include "treemoo/constraints.hpp"
#include "treemoo/maxmin_init.hpp"
#include "treemoo/problem.hpp"

namespace treemoo {

/// Uniform point in the bounds; ignores constraints.
inline Point uniform_point(const DesignSpace& space, Rng& rng) {
  std::vector<double> v(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& f = space[i];
    v[i] = f.is_continuous() ? rng.uniform(f.lower, f.upper)
                             : static_cast<double>(rng.index(f.num_labels()));
  }
  return Point(std::move(v));
}

/// Uniform sampling with rejection against the required constraints.
inline std::vector<Point> uniform_design(const DesignSpace& space, std::size_t n, Rng& rng,
                                         std::size_t max_tries = 100000) {
  std::vector<Point> out;
  std::size_t tries = 0;
  while (out.size() < n) {
    if (++tries > max_tries)
      throw Error("uniform design: no feasible point after " + std::to_string(max_tries) +
                  " draws");
    Point p = uniform_point(space, rng);
    if (space.constraints.empty() || is_feasible(space, p)) out.push_back(std::move(p));
  }
  return out;
}

/// The problem's initial design for `seed`; identical for every optimizer.
inline std::vector<Point> make_initial_design(const Problem& problem, std::size_t n,
                                              std::uint64_t seed,
                                              const SolveConfig& sampler = default_sampler_config()) {
  Rng rng(seed);
  if (problem.initial_design() == InitialDesign::Uniform)
    return uniform_design(problem.required_space(), n, rng);
  return feasible_maxmin_init(
      problem.space(), n, [&](std::size_t i, Rng& r) { return problem.sample_pin(i, r); }, rng,
      sampler);
}

}  // namespace treemoo
