#pragma once

// Random small acquisition problems shared by the solver tests and the
// acceptance suite.

#include <cmath>
#include <string>
#include <vector>

#include "treemoo/acquisition.hpp"
#include "treemoo/gbrt.hpp"
#include "treemoo/rng.hpp"

namespace treemoo::testing {

struct FixtureOptions {
  std::size_t max_trees = 5;
  std::size_t max_depth = 3;
  std::size_t max_data = 10;
  std::size_t max_labels = 4;
  bool allow_categorical = true;
  std::size_t objectives = 2;
};

inline DesignSpace random_space(Rng& rng, const FixtureOptions& o) {
  DesignSpace s;
  const std::size_t nc = 1 + rng.index(2);
  for (std::size_t i = 0; i < nc; ++i) {
    const double lo = std::round(rng.uniform(-3.0, 1.0) * 4.0) / 4.0;
    const double w = 0.5 + std::round(rng.uniform(0.0, 4.0) * 4.0) / 4.0;
    s.add_feature(FeatureSpec::continuous("x" + std::to_string(i), lo, lo + w));
  }
  if (o.allow_categorical && rng.uniform() < 0.7) {
    const std::size_t k = 2 + rng.index(o.max_labels - 1);
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < k; ++j) labels.push_back(std::string(1, static_cast<char>('a' + j)));
    s.add_feature(FeatureSpec::categorical("c", labels));
  }
  return s;
}

inline Point random_point(Rng& rng, const DesignSpace& s) {
  Point p;
  for (std::size_t f = 0; f < s.size(); ++f) {
    if (s[f].is_continuous())
      p.values.push_back(rng.uniform(s[f].lower, s[f].upper));
    else
      p.values.push_back(static_cast<double>(rng.index(s[f].num_labels())));
  }
  return p;
}

inline DataSet random_data(Rng& rng, const DesignSpace& s, std::size_t n, std::size_t nf) {
  DataSet d;
  // Random smooth-ish targets with a categorical offset.
  std::vector<std::vector<double>> coef(nf, std::vector<double>(s.size() + 1));
  for (auto& row : coef)
    for (auto& c : row) c = rng.uniform(-2.0, 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    Point p = random_point(rng, s);
    std::vector<double> y(nf);
    for (std::size_t o = 0; o < nf; ++o) {
      double v = coef[o].back();
      for (std::size_t f = 0; f < s.size(); ++f) {
        const double x = s[f].is_continuous() ? p.values[f] : p.values[f] * 0.7;
        v += coef[o][f] * std::sin(1.3 * x + static_cast<double>(o));
      }
      y[o] = v;
    }
    d.add(std::move(p), std::move(y));
  }
  return d;
}

inline std::vector<double> random_weights(Rng& rng, std::size_t nf) {
  std::vector<double> w(nf);
  double s = 0.0;
  for (auto& v : w) s += (v = rng.uniform());
  for (auto& v : w) v /= s;
  return w;
}

struct Fixture {
  DesignSpace space;
  DataSet data;
  AcquisitionProblem problem;
};

inline Fixture random_fixture(std::uint64_t seed, double kappa, const FixtureOptions& o = {}) {
  Rng rng(seed);
  Fixture fx;
  fx.space = random_space(rng, o);
  const std::size_t n = 3 + rng.index(o.max_data - 2);
  fx.data = random_data(rng, fx.space, n, o.objectives);
  GbrtConfig g;
  g.num_trees = 1 + rng.index(o.max_trees);
  g.max_depth = 1 + rng.index(o.max_depth);
  g.min_data_per_leaf = 1;
  g.learning_rate = 0.5;
  std::vector<TreeEnsemble> ens;
  for (std::size_t i = 0; i < o.objectives; ++i) ens.push_back(train_gbrt(fx.space, fx.data, i, g));
  const auto measure = rng.uniform() < 0.5 ? SimilarityMeasure::Overlap : SimilarityMeasure::Goodall4;
  fx.problem = make_chebyshev_problem(fx.space, std::move(ens), fx.data,
                                      random_weights(rng, o.objectives), kappa,
                                      make_similarity(fx.space, fx.data, measure),
                                      observed_bounds(fx.data));
  return fx;
}

}  // namespace treemoo::testing
