#pragma once

// NSGA-II with constraint-domination. Continuous features are genes in their
// bounds; a two-label categorical is one [0,1] gene cut at 0.5, wider ones
// are one-hot blocks in [0,1] decoded by argmax.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "treemoo/initial_design.hpp"
#include "treemoo/record.hpp"

namespace treemoo {

struct NsgaConfig {
  std::size_t budget = 80;
  std::size_t population = 10;  // also the initial design size
  double crossover_prob = 0.9;
  double sbx_eta = 15.0;
  // Per-gene mutation probability; 0 means 1/number of genes.
  double mutation_prob = 0.0;
  double mutation_eta = 20.0;
  SolveConfig sampler = default_sampler_config();

  void validate() const {
    if (population < 2 || population % 2 != 0)
      throw Error("nsga2: population must be even and >= 2");
    if (budget < population) throw Error("nsga2: budget must be >= population");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0))
      throw Error("nsga2: crossover probability must lie in [0, 1]");
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
      throw Error("nsga2: mutation probability must lie in [0, 1]");
    if (!(sbx_eta >= 0.0 && mutation_eta >= 0.0))
      throw Error("nsga2: distribution indices must be >= 0");
  }
};

/// Maps points to real gene vectors and back.
class GeneCodec {
 public:
  explicit GeneCodec(const DesignSpace& space) : space_(space) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto& f = space[i];
      offset_.push_back(lo_.size());
      const std::size_t width = f.is_continuous() ? 1 : (f.num_labels() == 2 ? 1 : f.num_labels());
      for (std::size_t k = 0; k < width; ++k) {
        lo_.push_back(f.is_continuous() ? f.lower : 0.0);
        hi_.push_back(f.is_continuous() ? f.upper : 1.0);
      }
    }
  }

  [[nodiscard]] std::size_t size() const { return lo_.size(); }
  [[nodiscard]] double lower(std::size_t g) const { return lo_[g]; }
  [[nodiscard]] double upper(std::size_t g) const { return hi_[g]; }

  [[nodiscard]] std::vector<double> encode(const Point& p) const {
    std::vector<double> g(size(), 0.0);
    for (std::size_t i = 0; i < space_.size(); ++i) {
      const auto& f = space_[i];
      if (f.is_continuous() || f.num_labels() == 2)
        g[offset_[i]] = p.values[i];
      else
        g[offset_[i] + p.label(i)] = 1.0;
    }
    return g;
  }

  [[nodiscard]] Point decode(const std::vector<double>& g) const {
    std::vector<double> v(space_.size());
    for (std::size_t i = 0; i < space_.size(); ++i) {
      const auto& f = space_[i];
      const std::size_t o = offset_[i];
      if (f.is_continuous()) {
        v[i] = std::clamp(g[o], f.lower, f.upper);
      } else if (f.num_labels() == 2) {
        v[i] = g[o] >= 0.5 ? 1.0 : 0.0;
      } else {
        const auto first = g.begin() + static_cast<std::ptrdiff_t>(o);
        v[i] = static_cast<double>(
            std::max_element(first, first + static_cast<std::ptrdiff_t>(f.num_labels())) - first);
      }
    }
    return Point(std::move(v));
  }

 private:
  const DesignSpace& space_;
  std::vector<std::size_t> offset_;
  std::vector<double> lo_, hi_;
};

struct Individual {
  std::vector<double> genes;
  std::vector<double> y;
  double violation = 0.0;
  bool feasible = true;
  std::size_t rank = 0;
  double crowding = 0.0;
};

/// a constraint-dominates b: feasible beats infeasible, lower violation wins
/// among infeasible, Pareto dominance among feasible.
inline bool constraint_dominates(const Individual& a, const Individual& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible) return a.violation < b.violation;
  return dominates(a.y, b.y);
}

/// Fast non-dominated sort under constraint-domination; sets rank and
/// returns the fronts.
inline std::vector<std::vector<std::size_t>> nondominated_sort(std::vector<Individual>& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (constraint_dominates(pop[i], pop[j]))
        dominated[i].push_back(j);
      else if (constraint_dominates(pop[j], pop[i]))
        ++count[i];
    }
    if (count[i] == 0) {
      pop[i].rank = 0;
      fronts[0].push_back(i);
    }
  }
  for (std::size_t f = 0; !fronts[f].empty(); ++f) {
    std::vector<std::size_t> next;
    for (std::size_t i : fronts[f])
      for (std::size_t j : dominated[i])
        if (--count[j] == 0) {
          pop[j].rank = f + 1;
          next.push_back(j);
        }
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

inline void assign_crowding(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
  for (std::size_t i : front) pop[i].crowding = 0.0;
  if (front.size() <= 2) {
    for (std::size_t i : front) pop[i].crowding = kInf;
    return;
  }
  const std::size_t nf = pop[front[0]].y.size();
  std::vector<std::size_t> order = front;
  for (std::size_t m = 0; m < nf; ++m) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a].y[m] < pop[b].y[m]; });
    const double lo = pop[order.front()].y[m];
    const double hi = pop[order.back()].y[m];
    pop[order.front()].crowding = pop[order.back()].crowding = kInf;
    if (hi - lo <= 0.0) continue;
    for (std::size_t k = 1; k + 1 < order.size(); ++k)
      pop[order[k]].crowding += (pop[order[k + 1]].y[m] - pop[order[k - 1]].y[m]) / (hi - lo);
  }
}

/// Keeps `n` individuals: whole fronts first, the last one by crowding.
inline std::vector<Individual> survive(std::vector<Individual> pool, std::size_t n) {
  const auto fronts = nondominated_sort(pool);
  std::vector<Individual> out;
  for (const auto& front : fronts) {
    assign_crowding(pool, front);
    if (out.size() + front.size() <= n) {
      for (std::size_t i : front) out.push_back(pool[i]);
      continue;
    }
    std::vector<std::size_t> f = front;
    std::stable_sort(f.begin(), f.end(), [&](std::size_t a, std::size_t b) {
      return pool[a].crowding > pool[b].crowding;
    });
    for (std::size_t k = 0; out.size() < n; ++k) out.push_back(pool[f[k]]);
    break;
  }
  return out;
}

namespace detail {

inline const Individual& tournament(const std::vector<Individual>& pop, Rng& rng) {
  const auto& a = pop[rng.index(pop.size())];
  const auto& b = pop[rng.index(pop.size())];
  if (a.feasible != b.feasible) return a.feasible ? a : b;
  if (!a.feasible) return a.violation <= b.violation ? a : b;
  if (a.rank != b.rank) return a.rank < b.rank ? a : b;
  if (a.crowding != b.crowding) return a.crowding > b.crowding ? a : b;
  return rng.uniform() < 0.5 ? a : b;
}

// Bounded simulated binary crossover, applied per gene with probability 1/2.
inline void sbx(std::vector<double>& c1, std::vector<double>& c2, const GeneCodec& codec,
                double eta, Rng& rng) {
  for (std::size_t g = 0; g < c1.size(); ++g) {
    if (rng.uniform() > 0.5) continue;
    if (std::abs(c1[g] - c2[g]) <= 1e-14) continue;
    const double lo = codec.lower(g), hi = codec.upper(g);
    const double y1 = std::min(c1[g], c2[g]), y2 = std::max(c1[g], c2[g]);
    const double u = rng.uniform();
    auto betaq = [&](double beta) {
      const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
      return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                              : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    };
    const double d = y2 - y1;
    double a = 0.5 * ((y1 + y2) - betaq(1.0 + 2.0 * (y1 - lo) / d) * d);
    double b = 0.5 * ((y1 + y2) + betaq(1.0 + 2.0 * (hi - y2) / d) * d);
    a = std::clamp(a, lo, hi);
    b = std::clamp(b, lo, hi);
    if (rng.uniform() < 0.5) std::swap(a, b);
    c1[g] = a;
    c2[g] = b;
  }
}

inline void polynomial_mutation(std::vector<double>& c, const GeneCodec& codec, double prob,
                                double eta, Rng& rng) {
  for (std::size_t g = 0; g < c.size(); ++g) {
    if (rng.uniform() >= prob) continue;
    const double lo = codec.lower(g), hi = codec.upper(g);
    if (hi <= lo) continue;
    const double y = c[g];
    const double d1 = (y - lo) / (hi - lo), d2 = (hi - y) / (hi - lo);
    const double u = rng.uniform();
    const double pw = 1.0 / (eta + 1.0);
    double dq = 0.0;
    if (u < 0.5) {
      const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
      dq = std::pow(v, pw) - 1.0;
    } else {
      const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
      dq = 1.0 - std::pow(v, pw);
    }
    c[g] = std::clamp(y + dq * (hi - lo), lo, hi);
  }
}

}  // namespace detail

/// Runs exactly cfg.budget evaluations; the first generation is the shared
/// initial design. Only feasible points enter the archive.
inline RunOutput nsga2_run(const Problem& problem, const NsgaConfig& cfg, std::uint64_t seed,
                           const std::optional<std::vector<Point>>& initial = std::nullopt,
    const IterationSink& sink = {}) {
  cfg.validate();
  const auto init =
      initial ? *initial : make_initial_design(problem, cfg.population, seed, cfg.sampler);
  if (init.size() != cfg.population) throw Error("initial design size differs from population");

  const DesignSpace& space = problem.required_space();
  const GeneCodec codec(space);
  const double pm = cfg.mutation_prob > 0.0 ? cfg.mutation_prob
                                            : 1.0 / static_cast<double>(codec.size());
  RunSession run(problem, "nsga2", seed, sink);
  Rng rng(seed ^ 0x3c6ef372fe94f82bULL);

  auto evaluate = [&](std::vector<double> genes, const char* phase) {
    IterationRecord it;
    it.phase = phase;
    it.point = codec.decode(genes);
    const auto& rec = run.commit(std::move(it));
    Individual ind;
    ind.genes = std::move(genes);
    ind.y = rec.y;
    ind.feasible = rec.feasible;
    ind.violation = rec.violation;
    return ind;
  };

  std::vector<Individual> pop;
  for (const auto& p : init) pop.push_back(evaluate(codec.encode(p), "initial"));
  pop = survive(std::move(pop), cfg.population);

  while (run.size() < cfg.budget) {
    std::vector<Individual> pool = pop;
    const std::size_t n_off = std::min(cfg.population, cfg.budget - run.size());
    std::vector<std::vector<double>> kids;
    while (kids.size() < n_off) {
      auto c1 = detail::tournament(pop, rng).genes;
      auto c2 = detail::tournament(pop, rng).genes;
      if (rng.uniform() < cfg.crossover_prob) detail::sbx(c1, c2, codec, cfg.sbx_eta, rng);
      detail::polynomial_mutation(c1, codec, pm, cfg.mutation_eta, rng);
      detail::polynomial_mutation(c2, codec, pm, cfg.mutation_eta, rng);
      kids.push_back(std::move(c1));
      if (kids.size() < n_off) kids.push_back(std::move(c2));
    }
    for (auto& k : kids) pool.push_back(evaluate(std::move(k), "offspring"));
    pop = survive(std::move(pool), cfg.population);
  }
  return run.finish();
}

}  // namespace treemoo
