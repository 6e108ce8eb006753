#pragma once

// Categorical similarity measures for the exploration term.

#include <string>
#include <vector>

#include "treemoo/dataset.hpp"
#include "treemoo/design_space.hpp"
#include "treemoo/error.hpp"

namespace treemoo {

enum class SimilarityMeasure { Overlap, Goodall4 };

inline const char* to_string(SimilarityMeasure m) {
  return m == SimilarityMeasure::Overlap ? "overlap" : "goodall4";
}

inline SimilarityMeasure parse_similarity(const std::string& s) {
  if (s == "overlap") return SimilarityMeasure::Overlap;
  if (s == "goodall4") return SimilarityMeasure::Goodall4;
  throw Error("unknown similarity measure '" + s + "' (expected overlap or goodall4)");
}

inline double overlap(std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; }

inline double overlap(const FeatureSpec& f, const std::string& a, const std::string& b) {
  if (!f.label_index(a) || !f.label_index(b))
    throw Error("feature '" + f.name + "': unknown label");
  return a == b ? 1.0 : 0.0;
}

/// count (count - 1) / (|D| (|D| - 1)).
inline double p_squared(std::size_t count, std::size_t dataset_size) {
  if (dataset_size < 2) throw Error("p_squared needs at least two data points");
  const double c = static_cast<double>(count), d = static_cast<double>(dataset_size);
  return c * (c - 1.0) / (d * (d - 1.0));
}

inline std::vector<std::size_t> label_counts(const DataSet& data, std::size_t feature,
                                             std::size_t num_labels) {
  std::vector<std::size_t> counts(num_labels, 0);
  for (const auto& p : data.points) ++counts.at(p.label(feature));
  return counts;
}

inline double goodall4(const std::vector<std::size_t>& counts, std::size_t dataset_size,
                       std::size_t a, std::size_t b) {
  if (a != b) {
    if (dataset_size < 2) throw Error("goodall4 needs at least two data points");
    return 0.0;
  }
  return p_squared(counts.at(a), dataset_size);
}

/// Per categorical feature, the similarity S_i(a, b) under one measure,
/// computed from the current dataset.
class SimilarityTable {
 public:
  SimilarityTable() = default;

  SimilarityTable(const DesignSpace& space, const DataSet& data, SimilarityMeasure measure)
      : measure_(measure), size_(data.size()), counts_(space.size()) {
    if (measure == SimilarityMeasure::Goodall4 && data.size() < 2)
      throw Error("goodall4 similarity needs at least two data points");
    for (std::size_t i = 0; i < space.size(); ++i)
      if (space[i].is_categorical()) counts_[i] = label_counts(data, i, space[i].num_labels());
  }

  [[nodiscard]] SimilarityMeasure measure() const { return measure_; }
  [[nodiscard]] std::size_t dataset_size() const { return size_; }
  [[nodiscard]] const std::vector<std::size_t>& counts(std::size_t feature) const {
    return counts_.at(feature);
  }

  [[nodiscard]] double operator()(std::size_t feature, std::size_t a, std::size_t b) const {
    if (measure_ == SimilarityMeasure::Overlap) return overlap(a, b);
    return goodall4(counts_.at(feature), size_, a, b);
  }

  /// Coefficient 1 - S(data_label, j) of nu_{i,j} in the categorical
  /// distance to a data point with label data_label.
  [[nodiscard]] double dissimilarity(std::size_t feature, std::size_t data_label,
                                     std::size_t j) const {
    return 1.0 - (*this)(feature, data_label, j);
  }

 private:
  SimilarityMeasure measure_ = SimilarityMeasure::Overlap;
  std::size_t size_ = 0;
  std::vector<std::vector<std::size_t>> counts_;
};

/// Builds the requested table; goodall4 on fewer than two points falls back
/// to overlap, where p^2 is undefined.
inline SimilarityTable make_similarity(const DesignSpace& space, const DataSet& data,
                                       SimilarityMeasure measure) {
  if (measure == SimilarityMeasure::Goodall4 && data.size() < 2)
    return SimilarityTable(space, data, SimilarityMeasure::Overlap);
  return SimilarityTable(space, data, measure);
}

}  // namespace treemoo
