#pragma once

// Pareto-front quality metrics: generational distance, inverted generational
// distance, maximum front error and the log volume ratio.

#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <vector>

#include "treemoo/error.hpp"
#include "treemoo/pareto.hpp"

namespace treemoo {

using Front = std::vector<std::vector<double>>;

namespace detail {

inline void check_front(const Front& f, const char* what) {
  if (f.empty()) throw Error(std::string(what) + ": empty front");
  for (const auto& r : f) {
    if (r.size() != f.front().size()) throw Error(std::string(what) + ": ragged front");
    for (double v : r)
      if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite front entry");
  }
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ContractViolation("metric: objective count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double closest(const std::vector<double>& r, const Front& f) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& q : f) m = std::min(m, euclid(r, q));
  return m;
}

}  // namespace detail

/// Mean distance from each approximate point to the true front.
inline double gd(const Front& approx, const Front& truth) {
  detail::check_front(approx, "gd");
  detail::check_front(truth, "gd");
  double s = 0.0;
  for (const auto& r : approx) s += detail::closest(r, truth);
  return s / static_cast<double>(approx.size());
}

/// Mean distance from each true point to the approximate front.
inline double igd(const Front& approx, const Front& truth) {
  detail::check_front(approx, "igd");
  detail::check_front(truth, "igd");
  double s = 0.0;
  for (const auto& r : truth) s += detail::closest(r, approx);
  return s / static_cast<double>(truth.size());
}

/// Worst distance from a true point to the approximate front.
inline double mpfe(const Front& approx, const Front& truth) {
  detail::check_front(approx, "mpfe");
  detail::check_front(truth, "mpfe");
  double m = 0.0;
  for (const auto& r : truth) m = std::max(m, detail::closest(r, approx));
  return m;
}

/// -log(1 - ratio). A ratio of 1 (or more) has no finite value; +inf is
/// returned and a warning goes to `warn`.
inline double vr_from_ratio(double ratio, std::ostream* warn = &std::cerr) {
  if (!(ratio >= 0.0)) throw ContractViolation("vr: negative volume ratio");
  if (ratio >= 1.0) {
    if (warn) *warn << "warning: vr undefined, approximate front matches the true front volume\n";
    return std::numeric_limits<double>::infinity();
  }
  return -std::log1p(-ratio);
}

/// Volume ratio of the approximate front's bounded hypervolume to the true
/// front's, both measured against `ref`. Points outside `ref` contribute
/// nothing.
inline double vr(const Front& approx, const Front& truth, const std::vector<double>& ref,
                 std::ostream* warn = &std::cerr) {
  const double vt = bounded_hypervolume_2d(truth, ref);
  if (!(vt > 0.0)) throw ContractViolation("vr: true front has zero volume");
  const double va = approx.empty() ? 0.0 : bounded_hypervolume_2d(approx, ref);
  return vr_from_ratio(va / vt, warn);
}

}  // namespace treemoo
