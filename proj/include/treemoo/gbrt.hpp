#pragma once

// Gradient-boosted regression trees with squared loss and native categorical
// splits. Trees split on x <= v for continuous features and on a left-going
// label set for categorical ones.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "treemoo/dataset.hpp"
#include "treemoo/design_space.hpp"
#include "treemoo/error.hpp"

namespace treemoo {

struct GbrtConfig {
  std::size_t num_trees = 400;
  std::size_t max_depth = 3;
  std::size_t min_data_per_leaf = 2;
  double learning_rate = 0.3;
  // A split must reduce the node's squared error by more than this fraction
  // of the initial total squared error.
  double min_relative_gain = 1e-12;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_trees < 1) throw Error("gbrt: num_trees must be >= 1");
    if (max_depth < 1) throw Error("gbrt: max_depth must be >= 1");
    if (min_data_per_leaf < 1) throw Error("gbrt: min_data_per_leaf must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      throw Error("gbrt: learning_rate must lie in (0, 1]");
  }
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;
  std::int32_t feature = kLeaf;
  double threshold = 0.0;        // continuous: x <= threshold goes left
  std::uint64_t left_labels = 0; // categorical: bit j set -> label j goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;            // leaf weight

  [[nodiscard]] bool is_leaf() const { return feature == kLeaf; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  [[nodiscard]] std::size_t leaf_of(const Point& p, const std::vector<FeatureSpec>& features) const {
    std::size_t n = 0;
    while (!nodes[n].is_leaf()) {
      const auto& nd = nodes[n];
      const auto f = static_cast<std::size_t>(nd.feature);
      bool go_left;
      if (features[f].is_continuous())
        go_left = p.values[f] <= nd.threshold;
      else
        go_left = (nd.left_labels >> p.label(f)) & 1ULL;
      n = static_cast<std::size_t>(go_left ? nd.left : nd.right);
    }
    return n;
  }

  [[nodiscard]] std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].is_leaf()) out.push_back(i);
    return out;
  }

  [[nodiscard]] std::size_t depth(std::size_t n = 0) const {
    if (nodes[n].is_leaf()) return 0;
    return 1 + std::max(depth(static_cast<std::size_t>(nodes[n].left)),
                        depth(static_cast<std::size_t>(nodes[n].right)));
  }
};

class TreeEnsemble {
 public:
  std::vector<FeatureSpec> features;
  double base_score = 0.0;
  std::vector<Tree> trees;
  // Training MSE after the base score and after each tree (size trees+1).
  std::vector<double> training_mse;

  [[nodiscard]] double predict(const Point& p) const {
    double v = base_score;
    for (const auto& t : trees) v += t.nodes[t.leaf_of(p, features)].value;
    return v;
  }

  /// Sorted unique split thresholds of continuous feature i.
  [[nodiscard]] std::vector<double> thresholds(std::size_t i) const {
    std::vector<double> v;
    for (const auto& t : trees)
      for (const auto& nd : t.nodes)
        if (!nd.is_leaf() && static_cast<std::size_t>(nd.feature) == i &&
            features[i].is_continuous())
          v.push_back(nd.threshold);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  void validate() const {
    for (std::size_t ti = 0; ti < trees.size(); ++ti) {
      const auto& t = trees[ti];
      const std::string where = "tree " + std::to_string(ti);
      if (t.nodes.empty()) throw Error(where + " has no nodes");
      std::vector<int> seen(t.nodes.size(), 0);
      std::vector<std::size_t> stack{0};
      while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        if (seen[n]++) throw Error(where + ": node reached twice");
        const auto& nd = t.nodes[n];
        if (nd.is_leaf()) {
          if (!std::isfinite(nd.value)) throw Error(where + ": non-finite leaf value");
          continue;
        }
        if (nd.feature < 0 || static_cast<std::size_t>(nd.feature) >= features.size())
          throw Error(where + ": split on unknown feature");
        const auto& f = features[static_cast<std::size_t>(nd.feature)];
        if (f.is_continuous()) {
          if (!(nd.threshold > f.lower && nd.threshold < f.upper))
            throw Error(where + ": threshold outside the open feature range");
        } else {
          const std::uint64_t all =
              f.num_labels() == 64 ? ~0ULL : ((1ULL << f.num_labels()) - 1ULL);
          if ((nd.left_labels & ~all) || nd.left_labels == 0 || nd.left_labels == all)
            throw Error(where + ": categorical split must be a non-empty proper label subset");
        }
        for (std::int32_t c : {nd.left, nd.right}) {
          if (c < 0 || static_cast<std::size_t>(c) >= t.nodes.size())
            throw Error(where + ": child index out of range");
          stack.push_back(static_cast<std::size_t>(c));
        }
      }
      for (std::size_t n = 0; n < seen.size(); ++n)
        if (!seen[n]) throw Error(where + ": unreachable node " + std::to_string(n));
    }
  }
};

namespace detail {

struct SplitChoice {
  bool found = false;
  double gain = 0.0;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::uint64_t left_labels = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FeatureSpec>& features, const std::vector<Point>& x,
              const std::vector<std::vector<std::size_t>>& order, const GbrtConfig& cfg,
              double min_gain)
      : features_(features), x_(x), order_(order), cfg_(cfg), min_gain_(min_gain),
        member_(x.size(), 0) {}

  Tree build(const std::vector<double>& residual) {
    residual_ = &residual;
    Tree t;
    std::vector<std::size_t> all(x_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(t, all, 0);
    return t;
  }

 private:
  std::int32_t grow(Tree& t, const std::vector<std::size_t>& idx, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(t.nodes.size());
    t.nodes.emplace_back();
    SplitChoice best;
    if (depth < cfg_.max_depth && idx.size() >= 2 * cfg_.min_data_per_leaf) best = find_split(idx);
    if (!best.found) {
      double s = 0.0;
      for (std::size_t i : idx) s += (*residual_)[i];
      t.nodes[id].value = cfg_.learning_rate * s / static_cast<double>(idx.size());
      return id;
    }
    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) (goes_left(best, i) ? left : right).push_back(i);
    t.nodes[id].feature = static_cast<std::int32_t>(best.feature);
    t.nodes[id].threshold = best.threshold;
    t.nodes[id].left_labels = best.left_labels;
    const std::int32_t l = grow(t, left, depth + 1);
    const std::int32_t r = grow(t, right, depth + 1);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
    return id;
  }

  bool goes_left(const SplitChoice& s, std::size_t i) const {
    if (features_[s.feature].is_continuous()) return x_[i].values[s.feature] <= s.threshold;
    return (s.left_labels >> x_[i].label(s.feature)) & 1ULL;
  }

  SplitChoice find_split(const std::vector<std::size_t>& idx) {
    const auto& r = *residual_;
    double total = 0.0;
    for (std::size_t i : idx) total += r[i];
    const double n = static_cast<double>(idx.size());
    const double parent = total * total / n;
    const std::size_t min_leaf = cfg_.min_data_per_leaf;

    for (std::size_t i : idx) member_[i] = 1;
    SplitChoice best;
    auto consider = [&](double gain, std::size_t f, double thr, std::uint64_t mask) {
      if (!(gain > min_gain_)) return;
      if (!best.found || gain > best.gain) best = {true, gain, f, thr, mask};
    };

    for (std::size_t f = 0; f < features_.size(); ++f) {
      if (features_[f].is_continuous()) {
        double sl = 0.0;
        std::size_t nl = 0;
        double prev = 0.0;
        for (std::size_t i : order_[f]) {
          if (!member_[i]) continue;
          const double v = x_[i].values[f];
          if (nl >= min_leaf && idx.size() - nl >= min_leaf && v > prev) {
            const double sr = total - sl;
            const double nr = n - static_cast<double>(nl);
            const double gain = sl * sl / static_cast<double>(nl) + sr * sr / nr - parent;
            double thr = 0.5 * (prev + v);
            if (!(thr > prev && thr < v)) thr = prev;
            consider(gain, f, thr, 0);
          }
          sl += r[i];
          ++nl;
          prev = v;
        }
      } else {
        const std::size_t k = features_[f].num_labels();
        std::vector<double> sum(k, 0.0);
        std::vector<std::size_t> cnt(k, 0);
        for (std::size_t i : idx) {
          sum[x_[i].label(f)] += r[i];
          ++cnt[x_[i].label(f)];
        }
        std::vector<std::size_t> labels;
        for (std::size_t j = 0; j < k; ++j)
          if (cnt[j]) labels.push_back(j);
        if (labels.size() < 2) continue;
        std::stable_sort(labels.begin(), labels.end(), [&](std::size_t a, std::size_t b) {
          return sum[a] / static_cast<double>(cnt[a]) < sum[b] / static_cast<double>(cnt[b]);
        });
        double sl = 0.0;
        std::size_t nl = 0;
        std::uint64_t mask = 0;
        for (std::size_t p = 0; p + 1 < labels.size(); ++p) {
          sl += sum[labels[p]];
          nl += cnt[labels[p]];
          mask |= 1ULL << labels[p];
          if (nl < min_leaf || idx.size() - nl < min_leaf) continue;
          const double sr = total - sl;
          const double nr = n - static_cast<double>(nl);
          const double gain = sl * sl / static_cast<double>(nl) + sr * sr / nr - parent;
          consider(gain, f, 0.0, mask);
        }
      }
    }
    for (std::size_t i : idx) member_[i] = 0;
    return best;
  }

  const std::vector<FeatureSpec>& features_;
  const std::vector<Point>& x_;
  const std::vector<std::vector<std::size_t>>& order_;
  const GbrtConfig& cfg_;
  double min_gain_;
  std::vector<char> member_;
  const std::vector<double>* residual_ = nullptr;
};

inline double mse(const std::vector<double>& residual) {
  double s = 0.0;
  for (double v : residual) s += v * v;
  return s / static_cast<double>(residual.size());
}

}  // namespace detail

/// Fits one ensemble to target column y over points x.
inline TreeEnsemble train_gbrt(const std::vector<FeatureSpec>& features, const std::vector<Point>& x,
                               const std::vector<double>& y, const GbrtConfig& cfg) {
  cfg.validate();
  if (x.empty()) throw Error("gbrt: cannot train on an empty dataset");
  if (x.size() != y.size()) throw ContractViolation("gbrt: X and y differ in length");
  if (x.size() < cfg.min_data_per_leaf)
    throw Error("gbrt: fewer training points than min_data_per_leaf");
  for (double v : y)
    if (!std::isfinite(v)) throw Error("gbrt: non-finite target");

  TreeEnsemble ens;
  ens.features = features;
  const double n = static_cast<double>(y.size());
  ens.base_score = std::accumulate(y.begin(), y.end(), 0.0) / n;

  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - ens.base_score;
  ens.training_mse.push_back(detail::mse(residual));

  const bool constant = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
  if (constant) return ens;

  std::vector<std::vector<std::size_t>> order(features.size());
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (!features[f].is_continuous()) continue;
    order[f].resize(x.size());
    std::iota(order[f].begin(), order[f].end(), 0);
    std::stable_sort(order[f].begin(), order[f].end(), [&](std::size_t a, std::size_t b) {
      return x[a].values[f] < x[b].values[f];
    });
  }

  const double min_gain = cfg.min_relative_gain * ens.training_mse.front() * n;
  detail::TreeBuilder builder(features, x, order, cfg, min_gain);
  for (std::size_t t = 0; t < cfg.num_trees; ++t) {
    Tree tree = builder.build(residual);
    for (std::size_t i = 0; i < x.size(); ++i)
      residual[i] -= tree.nodes[tree.leaf_of(x[i], features)].value;
    ens.trees.push_back(std::move(tree));
    ens.training_mse.push_back(detail::mse(residual));
  }
  return ens;
}

inline TreeEnsemble train_gbrt(const DesignSpace& space, const DataSet& data, std::size_t objective,
                               const GbrtConfig& cfg) {
  return train_gbrt(space.features, data.points, data.column(objective), cfg);
}

}  // namespace treemoo
