#pragma once

// Analytic bi-objective test functions and dense-sweep reference fronts.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "treemoo/error.hpp"
#include "treemoo/metrics.hpp"
#include "treemoo/pareto.hpp"
#include "treemoo/problem.hpp"

namespace treemoo::bench {

enum class SyntheticKind { FonsecaFleming, Schaffer, Kursawe, SPlus, SMinus };

inline const std::vector<std::string>& synthetic_names() {
  static const std::vector<std::string> names{"fonseca_fleming", "schaffer", "kursawe", "s_plus",
                                              "s_minus"};
  return names;
}

inline std::vector<double> eval_fonseca(const std::vector<double>& x) {
  const double c = 1.0 / std::sqrt(static_cast<double>(x.size()));
  double a = 0.0, b = 0.0;
  for (double v : x) {
    a += (v - c) * (v - c);
    b += (v + c) * (v + c);
  }
  return {1.0 - std::exp(-a), 1.0 - std::exp(-b)};
}

inline std::vector<double> eval_schaffer(const std::vector<double>& x) {
  return {x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)};
}

inline std::vector<double> eval_kursawe(const std::vector<double>& x) {
  double f1 = 0.0, f2 = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    f1 += -10.0 * std::exp(-0.2 * std::sqrt(x[i] * x[i] + x[i + 1] * x[i + 1]));
  for (double v : x) f2 += std::pow(std::abs(v), 0.8) + 5.0 * std::sin(v * v * v);
  return {f1, f2};
}

inline std::vector<double> eval_s(const std::vector<double>& x, double sign) {
  return {x[0], 10.0 - x[0] + x[1] + sign * std::sin(x[0])};
}

class SyntheticProblem : public Problem {
 public:
  explicit SyntheticProblem(SyntheticKind kind) : kind_(kind) {
    auto add = [&](std::size_t dim, double lo, double hi) {
      for (std::size_t i = 0; i < dim; ++i)
        space_.add_feature(FeatureSpec::continuous("x" + std::to_string(i + 1), lo, hi));
    };
    switch (kind) {
      case SyntheticKind::FonsecaFleming:
        add(2, -4.0, 4.0);
        ref_ = {1.0, 1.0};
        break;
      case SyntheticKind::Schaffer:
        add(1, -3.0, 3.0);
        ref_ = {9.0, 25.0};
        break;
      case SyntheticKind::Kursawe:
        add(3, -5.0, 5.0);
        ref_ = {-4.0, 25.0};
        break;
      case SyntheticKind::SPlus:
      case SyntheticKind::SMinus:
        add(2, 0.0, 10.0);
        ref_ = {10.0, 12.0};
        break;
    }
  }

  [[nodiscard]] std::string name() const override {
    return synthetic_names()[static_cast<std::size_t>(kind_)];
  }
  [[nodiscard]] SyntheticKind kind() const { return kind_; }
  [[nodiscard]] const DesignSpace& space() const override { return space_; }
  [[nodiscard]] std::size_t dimension() const { return space_.size(); }

  [[nodiscard]] std::vector<double> eval_raw(const std::vector<double>& x) const {
    switch (kind_) {
      case SyntheticKind::FonsecaFleming: return eval_fonseca(x);
      case SyntheticKind::Schaffer: return eval_schaffer(x);
      case SyntheticKind::Kursawe: return eval_kursawe(x);
      case SyntheticKind::SPlus: return eval_s(x, 1.0);
      case SyntheticKind::SMinus: return eval_s(x, -1.0);
    }
    return {};
  }

  [[nodiscard]] std::vector<double> evaluate(const Point& p) const override {
    if (!space_.in_bounds(p)) throw Error(name() + ": point outside the input bounds");
    return eval_raw(p.values);
  }

  [[nodiscard]] std::vector<double> reference_point() const override { return ref_; }
  [[nodiscard]] InitialDesign initial_design() const override { return InitialDesign::Uniform; }
  [[nodiscard]] bool has_true_front() const override { return true; }

 private:
  SyntheticKind kind_;
  DesignSpace space_;
  std::vector<double> ref_;
};

inline std::unique_ptr<SyntheticProblem> make_synthetic(const std::string& name) {
  const auto& names = synthetic_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return std::make_unique<SyntheticProblem>(static_cast<SyntheticKind>(i));
  return nullptr;
}

/// i-th element of the Halton sequence in the given prime base.
inline double halton(std::size_t i, std::size_t base) {
  double f = 1.0, r = 0.0;
  for (std::size_t n = i; n > 0; n /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(n % base);
  }
  return r;
}

/// Reference front by a dense sweep and a non-dominated filter: a full grid
/// for up to two inputs, a Halton sequence beyond that.
inline Front true_front(const SyntheticProblem& prob, std::size_t samples) {
  if (samples == 0) throw Error("truefront: sample count must be positive");
  const auto& s = prob.space();
  const std::size_t dim = s.size();
  Front ys;
  std::vector<double> x(dim);
  if (dim <= 2) {
    const auto per = static_cast<std::size_t>(
        std::ceil(std::pow(static_cast<double>(samples), 1.0 / static_cast<double>(dim))));
    const std::size_t m = std::max<std::size_t>(per, 2);
    std::vector<std::size_t> idx(dim, 0);
    while (true) {
      for (std::size_t i = 0; i < dim; ++i)
        x[i] = s[i].lower + s[i].width() * static_cast<double>(idx[i]) / static_cast<double>(m - 1);
      ys.push_back(prob.eval_raw(x));
      std::size_t i = 0;
      while (i < dim && ++idx[i] == m) idx[i++] = 0;
      if (i == dim) break;
    }
  } else {
    static const std::size_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    require(dim <= 8, "truefront: at most 8 inputs");
    for (std::size_t k = 1; k <= samples; ++k) {
      for (std::size_t i = 0; i < dim; ++i) x[i] = s[i].lower + s[i].width() * halton(k, primes[i]);
      ys.push_back(prob.eval_raw(x));
    }
  }
  return nondominated_2d(std::move(ys));
}

}  // namespace treemoo::bench
