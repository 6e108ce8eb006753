#pragma once

// Structured form of one acquisition solve: the ensembles, scalarization,
// exploration data and design space. The encoder turns it into explicit
// MIQP rows; the solver works on it directly.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "treemoo/constraints.hpp"
#include "treemoo/dataset.hpp"
#include "treemoo/design_space.hpp"
#include "treemoo/gbrt.hpp"
#include "treemoo/similarity.hpp"

namespace treemoo {

inline constexpr double kMinNormalizationWidth = 1e-8;
inline constexpr double kDefaultKappa = 1.96;

enum class AcquisitionMode {
  Chebyshev,  // minimize max_i w_i (mu_i - lo_i) / den_i - (kappa / n) alpha
  MaxMin      // maximize the normalized Manhattan distance to the closest sample
};

/// Interval index of every continuous feature plus the label of every
/// categorical feature. Points with equal signatures share all nu values.
using CellSignature = std::vector<std::size_t>;

struct AcquisitionProblem {
  AcquisitionMode mode = AcquisitionMode::Chebyshev;
  DesignSpace space;
  std::vector<TreeEnsemble> ensembles;
  std::vector<double> weights;
  std::vector<double> norm_lo;
  std::vector<double> norm_den;
  double kappa = kDefaultKappa;
  std::vector<Point> data;
  SimilarityTable similarity;
  // Union of split thresholds over all ensembles, per feature (empty for
  // categorical features).
  std::vector<std::vector<double>> thresholds;
  std::vector<CellSignature> excluded;

  [[nodiscard]] std::size_t num_features() const { return space.size(); }
  [[nodiscard]] std::size_t num_continuous() const { return space.continuous_indices().size(); }
  [[nodiscard]] std::size_t num_categorical() const { return space.categorical_indices().size(); }
  [[nodiscard]] double alpha_cap() const { return static_cast<double>(num_features()); }

  /// Index k such that x lies in (v_k, v_{k+1}] (v_0 = lower bound).
  [[nodiscard]] std::size_t interval_index(std::size_t f, double x) const {
    const auto& v = thresholds[f];
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  }

  [[nodiscard]] CellSignature signature(const Point& p) const {
    CellSignature s(space.size());
    for (std::size_t f = 0; f < space.size(); ++f)
      s[f] = space[f].is_continuous() ? interval_index(f, p.values[f]) : p.label(f);
    return s;
  }

  [[nodiscard]] bool is_excluded(const Point& p) const {
    if (excluded.empty()) return false;
    const auto s = signature(p);
    return std::find(excluded.begin(), excluded.end(), s) != excluded.end();
  }

  [[nodiscard]] double normalized(std::size_t f, double x) const {
    return (x - space[f].lower) / space[f].width();
  }

  /// Chebyshev scalarization of the surrogate predictions at p.
  [[nodiscard]] double scalarized(const Point& p) const {
    double m = -kInf;
    for (std::size_t i = 0; i < ensembles.size(); ++i)
      m = std::max(m, weights[i] * (ensembles[i].predict(p) - norm_lo[i]) / norm_den[i]);
    return ensembles.empty() ? 0.0 : m;
  }

  /// Squared normalized distance (continuous part, capped at |N|) and
  /// categorical dissimilarity to data point d.
  [[nodiscard]] double distance_to(const Point& p, std::size_t d) const {
    const Point& q = data[d];
    double cont = 0.0, cat = 0.0;
    for (std::size_t f = 0; f < space.size(); ++f) {
      if (space[f].is_continuous()) {
        const double u = (p.values[f] - q.values[f]) / space[f].width();
        cont += mode == AcquisitionMode::Chebyshev ? u * u : std::abs(u);
      } else if (mode == AcquisitionMode::Chebyshev) {
        cat += similarity.dissimilarity(f, q.label(f), p.label(f));
      } else {
        cat += p.label(f) == q.label(f) ? 0.0 : 1.0;
      }
    }
    if (mode == AcquisitionMode::Chebyshev)
      cont = std::min(cont, static_cast<double>(num_continuous()));
    return cont + cat;
  }

  /// Exploration value alpha at p: distance to the closest data point.
  [[nodiscard]] double exploration(const Point& p) const {
    double a = alpha_cap();
    for (std::size_t d = 0; d < data.size(); ++d) a = std::min(a, distance_to(p, d));
    return a;
  }

  /// Objective value of the acquisition at a real point (minimized).
  [[nodiscard]] double value(const Point& p) const {
    if (mode == AcquisitionMode::MaxMin) return -exploration(p);
    const double n = static_cast<double>(num_features());
    return scalarized(p) - (kappa / n) * exploration(p);
  }

  void rebuild_thresholds() {
    thresholds.assign(space.size(), {});
    for (const auto& e : ensembles) {
      for (std::size_t f = 0; f < space.size(); ++f) {
        if (!space[f].is_continuous()) continue;
        auto t = e.thresholds(f);
        thresholds[f].insert(thresholds[f].end(), t.begin(), t.end());
      }
    }
    for (auto& v : thresholds) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  void validate() const {
    space.validate();
    if (mode == AcquisitionMode::Chebyshev) {
      if (ensembles.empty()) throw Error("acquisition: at least one ensemble is required");
      if (weights.size() != ensembles.size() || norm_lo.size() != ensembles.size() ||
          norm_den.size() != ensembles.size())
        throw ContractViolation("acquisition: weight/normalization sizes differ from ensembles");
      double s = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) throw ContractViolation("acquisition: negative weight");
        s += w;
      }
      if (std::abs(s - 1.0) > 1e-9) throw ContractViolation("acquisition: weights must sum to 1");
      for (double d : norm_den)
        if (!(d > 0.0) || !std::isfinite(d)) throw ContractViolation("acquisition: bad normalization");
      if (!(kappa >= 0.0)) throw ContractViolation("acquisition: kappa must be >= 0");
      if (data.empty()) throw Error("acquisition: exploration needs at least one data point");
      for (const auto& e : ensembles)
        if (e.features.size() != space.size())
          throw Error("acquisition: ensemble feature count differs from the design space");
    }
    for (const auto& p : data)
      if (!space.in_bounds(p, 1e-9)) throw Error("acquisition: data point outside the design space");
  }
};

struct NormalizationBounds {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Per-objective (min, max) of the observed targets, with optional overrides.
inline NormalizationBounds observed_bounds(const DataSet& data,
                                           const std::optional<NormalizationBounds>& user = {}) {
  NormalizationBounds b;
  const std::size_t nf = data.num_objectives();
  b.lo.assign(nf, kInf);
  b.hi.assign(nf, -kInf);
  for (const auto& y : data.targets)
    for (std::size_t i = 0; i < nf; ++i) {
      b.lo[i] = std::min(b.lo[i], y[i]);
      b.hi[i] = std::max(b.hi[i], y[i]);
    }
  if (user) {
    for (std::size_t i = 0; i < nf; ++i) {
      if (i < user->lo.size() && std::isfinite(user->lo[i])) b.lo[i] = user->lo[i];
      if (i < user->hi.size() && std::isfinite(user->hi[i])) b.hi[i] = user->hi[i];
    }
  }
  return b;
}

inline AcquisitionProblem make_chebyshev_problem(const DesignSpace& space,
                                                 std::vector<TreeEnsemble> ensembles,
                                                 const DataSet& data, std::vector<double> weights,
                                                 double kappa, const SimilarityTable& sim,
                                                 const NormalizationBounds& bounds) {
  AcquisitionProblem p;
  p.mode = AcquisitionMode::Chebyshev;
  p.space = space;
  p.ensembles = std::move(ensembles);
  p.weights = std::move(weights);
  p.kappa = kappa;
  p.data = data.points;
  p.similarity = sim;
  for (std::size_t i = 0; i < p.ensembles.size(); ++i) {
    if (bounds.hi[i] < bounds.lo[i]) throw Error("normalization: max below min");
    p.norm_lo.push_back(bounds.lo[i]);
    p.norm_den.push_back(std::max(bounds.hi[i] - bounds.lo[i], kMinNormalizationWidth));
  }
  p.rebuild_thresholds();
  p.validate();
  return p;
}

inline AcquisitionProblem make_maxmin_problem(const DesignSpace& space,
                                              const std::vector<Point>& samples) {
  AcquisitionProblem p;
  p.mode = AcquisitionMode::MaxMin;
  p.space = space;
  p.data = samples;
  p.kappa = 0.0;
  p.thresholds.assign(space.size(), {});
  p.validate();
  return p;
}

}  // namespace treemoo
