#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "treemoo/design_space.hpp"
#include "treemoo/error.hpp"

namespace treemoo {

/// Minimization dominance: a <= b componentwise with at least one strict.
inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "dominates: vectors differ in length");
  bool strict = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
    if (a[j] < b[j]) strict = true;
  }
  return strict;
}

/// Indices of the non-dominated rows; exact duplicates keep the first.
inline std::vector<std::size_t> nondominated_indices(const std::vector<std::vector<double>>& ys) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    bool drop = false;
    for (std::size_t k = 0; k < ys.size() && !drop; ++k) {
      if (k == i) continue;
      if (dominates(ys[k], ys[i]) || (k < i && ys[k] == ys[i])) drop = true;
    }
    if (!drop) keep.push_back(i);
  }
  return keep;
}

/// Fast non-dominated filter for two objectives (sort + sweep).
inline std::vector<std::vector<double>> nondominated_2d(std::vector<std::vector<double>> ys) {
  std::sort(ys.begin(), ys.end());
  std::vector<std::vector<double>> out;
  double best = kInf;
  for (auto& y : ys) {
    if (y[1] < best) {
      best = y[1];
      out.push_back(std::move(y));
    }
  }
  return out;
}

/// Area dominated by `front` and bounded by `ref` (two objectives). Every
/// point must be weakly dominated by the reference.
inline double hypervolume_2d(std::vector<std::vector<double>> front, const std::vector<double>& ref) {
  require(ref.size() == 2, "hypervolume is implemented for two objectives only");
  for (const auto& y : front) {
    require(y.size() == 2, "hypervolume is implemented for two objectives only");
    require(y[0] <= ref[0] && y[1] <= ref[1], "front entry exceeds the reference point");
  }
  front = nondominated_2d(std::move(front));
  double area = 0.0, prev_y = ref[1];
  for (const auto& y : front) {
    area += (ref[0] - y[0]) * (prev_y - y[1]);
    prev_y = y[1];
  }
  return area;
}

/// Hypervolume of the part of `front` inside the reference box; points
/// beyond the reference contribute nothing.
inline double bounded_hypervolume_2d(const std::vector<std::vector<double>>& front,
                                     const std::vector<double>& ref) {
  std::vector<std::vector<double>> inside;
  for (const auto& y : front)
    if (y.size() == 2 && y[0] <= ref[0] && y[1] <= ref[1]) inside.push_back(y);
  return hypervolume_2d(std::move(inside), ref);
}

class ParetoArchive {
 public:
  struct Entry {
    Point point;
    std::vector<double> y;
  };

  /// Returns true when y entered the archive. Entries dominated by y are
  /// removed; an exact duplicate of an entry is rejected.
  bool insert(const Point& p, const std::vector<double>& y) {
    for (double v : y) require(std::isfinite(v), "archive_insert: non-finite objective");
    for (const auto& e : entries_) {
      require(e.y.size() == y.size(), "archive_insert: objective count mismatch");
      if (dominates(e.y, y) || e.y == y) return false;
    }
    std::erase_if(entries_, [&](const Entry& e) { return dominates(y, e.y); });
    entries_.push_back({p, y});
    return true;
  }

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }

  [[nodiscard]] std::vector<std::vector<double>> front() const {
    std::vector<std::vector<double>> f;
    for (const auto& e : entries_) f.push_back(e.y);
    std::sort(f.begin(), f.end());
    return f;
  }

  [[nodiscard]] double hypervolume(const std::vector<double>& ref) const {
    if (!entries_.empty() && entries_.front().y.size() != 2)
      throw Error("hypervolume: unsupported number of objectives (only 2)");
    return bounded_hypervolume_2d(front(), ref);
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace treemoo
