#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "treemoo/design_space.hpp"
#include "treemoo/error.hpp"

namespace treemoo {

/// Evaluated points X and their objective vectors Y (one row per point).
struct DataSet {
  std::vector<Point> points;
  std::vector<std::vector<double>> targets;

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }
  [[nodiscard]] std::size_t num_objectives() const {
    return targets.empty() ? 0 : targets.front().size();
  }

  void add(Point p, std::vector<double> y) {
    if (!targets.empty() && y.size() != targets.front().size())
      throw ContractViolation("objective vector length differs from earlier rows");
    if (y.empty()) throw ContractViolation("objective vector must not be empty");
    for (double v : y)
      if (!std::isfinite(v)) throw Error("non-finite objective value");
    points.push_back(std::move(p));
    targets.push_back(std::move(y));
  }

  [[nodiscard]] std::vector<double> column(std::size_t j) const {
    std::vector<double> c;
    c.reserve(targets.size());
    for (const auto& row : targets) c.push_back(row.at(j));
    return c;
  }

  [[nodiscard]] bool contains(const Point& p) const {
    for (const auto& q : points)
      if (q.values == p.values) return true;
    return false;
  }

  void validate(const DesignSpace& space) const {
    if (points.size() != targets.size()) throw Error("dataset rows do not align");
    for (std::size_t r = 0; r < points.size(); ++r) {
      if (!space.in_bounds(points[r], 1e-9))
        throw Error("dataset row " + std::to_string(r) + " lies outside the design space");
      if (targets[r].size() != num_objectives())
        throw Error("dataset row " + std::to_string(r) + " has a ragged target vector");
      for (double v : targets[r])
        if (!std::isfinite(v)) throw Error("dataset row " + std::to_string(r) + " has a non-finite target");
    }
  }
};

}  // namespace treemoo
