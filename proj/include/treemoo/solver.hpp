#pragma once

// Branch-and-bound for the acquisition MIQP. Nodes are boxes over the
// features (label sets for categorical ones). Branching goes categorical
// labels -> binary aux -> tree thresholds -> spatial bisection. Bounds use
// per-tree minimum reachable leaves for the surrogate part and box maxima of
// the distance rows for the exploration part.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "treemoo/acquisition.hpp"
#include "treemoo/constraints.hpp"
#include "treemoo/encode.hpp"
#include "treemoo/propagate.hpp"
#include "treemoo/rng.hpp"

namespace treemoo {

struct SolveConfig {
  double rel_gap = 1e-4;
  double abs_gap = 1e-9;
  double feas_tol = kDefaultFeasTol;
  double time_limit_secs = 100.0;
  std::size_t node_limit = 0;  // 0: no node limit
  std::uint64_t seed = 0;
  // Local search effort per discrete assignment (acquisition evaluations)
  // and the number of discrete assignments that receive it.
  std::size_t heuristic_evals = 3000;
  std::size_t heuristic_assignments = 64;
  std::size_t heuristic_restarts = 3;
  // Boxes narrower than this (relative to the feature range) are not split.
  double min_width = 1e-10;
  std::ostream* node_log = nullptr;

  void validate() const {
    if (!(rel_gap > 0.0)) throw Error("solver: rel_gap must be > 0");
    if (!(feas_tol > 0.0)) throw Error("solver: feas_tol must be > 0");
    if (!(abs_gap >= 0.0)) throw Error("solver: abs_gap must be >= 0");
  }
};

enum class SolveStatus { Optimal, GapLimit, TimeLimitFeasible, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::GapLimit: return "gap_limit";
    case SolveStatus::TimeLimitFeasible: return "time_limit_feasible";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<Point> point;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;
  std::size_t nodes = 0;
  double wall_seconds = 0.0;
  double model_violation = 0.0;  // max scaled row violation of the incumbent

  [[nodiscard]] bool feasible() const { return point.has_value(); }
};

namespace detail {

// Max over the box [a, b] (normalized coordinates, 1 or 2 free dims) of
// min_d (|u - p_d|^2 + c_d). Every point where one g_d attains the minimum
// forms a convex polygon (power cell) and g_d is convex there, so the
// maximum sits on a polygon vertex.
struct CellMax {
  double value = -kInf;
  std::vector<double> arg;
};

inline CellMax power_cell_max(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<std::vector<double>>& p, const std::vector<double>& c) {
  const std::size_t dim = a.size();
  const std::size_t nd = p.size();
  auto eval = [&](const std::vector<double>& u) {
    double m = kInf;
    for (std::size_t d = 0; d < nd; ++d) {
      double s = c[d];
      for (std::size_t i = 0; i < dim; ++i) s += (u[i] - p[d][i]) * (u[i] - p[d][i]);
      m = std::min(m, s);
    }
    return m;
  };
  CellMax best;
  auto consider = [&](std::vector<double> u) {
    for (std::size_t i = 0; i < dim; ++i) u[i] = std::clamp(u[i], a[i], b[i]);
    const double v = eval(u);
    if (v > best.value) {
      best.value = v;
      best.arg = std::move(u);
    }
  };
  if (dim == 0) {
    consider({});
    return best;
  }
  for (std::size_t d = 0; d < nd; ++d) {
    if (dim == 1) {
      double lo = a[0], hi = b[0];
      for (std::size_t e = 0; e < nd && lo <= hi; ++e) {
        if (e == d) continue;
        // 2 (p_e - p_d) u <= p_e^2 - p_d^2 + c_e - c_d
        const double k = 2.0 * (p[e][0] - p[d][0]);
        const double r = p[e][0] * p[e][0] - p[d][0] * p[d][0] + c[e] - c[d];
        if (k > 0) hi = std::min(hi, r / k);
        else if (k < 0) lo = std::max(lo, r / k);
        else if (r < 0) lo = kInf;
      }
      if (lo <= hi) {
        consider({lo});
        consider({hi});
      }
      continue;
    }
    std::vector<std::array<double, 2>> poly{{a[0], a[1]}, {b[0], a[1]}, {b[0], b[1]}, {a[0], b[1]}};
    for (std::size_t e = 0; e < nd && !poly.empty(); ++e) {
      if (e == d) continue;
      const double k0 = 2.0 * (p[e][0] - p[d][0]);
      const double k1 = 2.0 * (p[e][1] - p[d][1]);
      const double r = p[e][0] * p[e][0] + p[e][1] * p[e][1] - p[d][0] * p[d][0] -
                       p[d][1] * p[d][1] + c[e] - c[d];
      if (k0 == 0.0 && k1 == 0.0) {
        if (r < 0) poly.clear();
        continue;
      }
      std::vector<std::array<double, 2>> out;
      const std::size_t m = poly.size();
      for (std::size_t i = 0; i < m; ++i) {
        const auto& s = poly[i];
        const auto& t = poly[(i + 1) % m];
        const double fs = k0 * s[0] + k1 * s[1] - r;
        const double ft = k0 * t[0] + k1 * t[1] - r;
        if (fs <= 0) out.push_back(s);
        if ((fs < 0 && ft > 0) || (fs > 0 && ft < 0)) {
          const double lam = fs / (fs - ft);
          out.push_back({s[0] + lam * (t[0] - s[0]), s[1] + lam * (t[1] - s[1])});
        }
      }
      poly = std::move(out);
    }
    for (const auto& v : poly) consider({v[0], v[1]});
  }
  return best;
}

}  // namespace detail

class Solver {
 public:
  Solver(const EncodedProblem& enc, SolveConfig cfg)
      : enc_(enc), p_(enc.problem), s_(enc.problem.space), cfg_(cfg), prop_(s_, cfg.feas_tol) {
    cfg_.validate();
    cont_ = s_.continuous_indices();
    cat_ = s_.categorical_indices();
    n_ = static_cast<double>(s_.size());
  }

  /// Valid lower bound of the objective over every point of d.
  [[nodiscard]] double bound(const Domain& d) const {
    const double lead = p_.mode == AcquisitionMode::Chebyshev ? tree_bound(d) : 0.0;
    const double a = alpha_upper(d);
    if (p_.mode == AcquisitionMode::MaxMin) return -a;
    return lead - (p_.kappa / n_) * a;
  }

  SolveResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    SolveResult res;

    Domain root = Domain::root(s_);
    if (!prop_.propagate(root)) {
      res.status = SolveStatus::Infeasible;
      res.wall_seconds = elapsed();
      return res;
    }
    push(std::move(root), 0);

    double unresolved = kInf;
    double best_bound = -kInf;
    bool limit_hit = false;
    while (!queue_.empty()) {
      const double lb = std::min(queue_.top().bound, unresolved);
      best_bound = std::max(best_bound, std::min(lb, inc_value_));
      if (have_inc() && gap_closed(lb)) break;
      if (have_inc() && ((cfg_.node_limit && nodes_ >= cfg_.node_limit) ||
                         elapsed() >= cfg_.time_limit_secs)) {
        limit_hit = true;
        break;
      }
      Node node = queue_.top();
      queue_.pop();
      if (node.bound >= inc_value_) continue;
      ++nodes_;
      if (cfg_.node_log)
        *cfg_.node_log << "node " << node.id << " depth " << node.depth << " bound " << node.bound
                       << " incumbent " << inc_value_ << "\n";
      process(node, unresolved);
    }

    double lb = unresolved;
    if (!queue_.empty()) lb = std::min(lb, queue_.top().bound);
    if (have_inc()) {
      lb = std::min(lb, inc_value_);
      best_bound = std::max(best_bound, lb);
      res.point = inc_point_;
      res.objective = inc_value_;
      res.bound = std::min(best_bound, inc_value_);
      res.gap = (inc_value_ - res.bound) / std::max(std::abs(inc_value_), 1e-10);
      if (limit_hit)
        res.status = gap_closed(res.bound) ? SolveStatus::Optimal : SolveStatus::TimeLimitFeasible;
      else
        res.status = gap_closed(res.bound) ? SolveStatus::Optimal : SolveStatus::GapLimit;
      res.model_violation = enc_.model.max_violation(complete_assignment(enc_, *inc_point_));
    } else {
      res.status = SolveStatus::Infeasible;
      res.bound = kInf;
    }
    res.nodes = nodes_;
    res.wall_seconds = elapsed();
    return res;
  }

 private:
  struct Node {
    Domain dom;
    double bound = 0.0;
    std::size_t depth = 0;
    std::uint64_t id = 0;
  };
  struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound > b.bound;
      if (a.depth != b.depth) return a.depth < b.depth;
      return a.id > b.id;
    }
  };

  [[nodiscard]] bool have_inc() const { return inc_point_.has_value(); }

  [[nodiscard]] bool gap_closed(double lb) const {
    const double g = inc_value_ - lb;
    return g <= cfg_.abs_gap || g / std::max(std::abs(inc_value_), 1e-10) <= cfg_.rel_gap;
  }

  void push(Domain dom, std::size_t depth) {
    Node n;
    n.bound = bound(dom);
    if (n.bound >= inc_value_) return;
    n.dom = std::move(dom);
    n.depth = depth;
    n.id = next_id_++;
    queue_.push(std::move(n));
  }

  // ---- bounds ------------------------------------------------------------

  [[nodiscard]] static bool left_reachable(double v, const Domain& d, std::size_t f) {
    return d.lo_open[f] ? d.lo[f] < v : d.lo[f] <= v;
  }
  [[nodiscard]] static bool right_reachable(double v, const Domain& d, std::size_t f) {
    return d.hi[f] > v;
  }

  [[nodiscard]] double tree_min(const Tree& t, const Domain& d) const {
    double best = kInf;
    std::size_t stack[64];
    std::size_t top = 0;
    stack[top++] = 0;
    while (top) {
      const auto& nd = t.nodes[stack[--top]];
      if (nd.is_leaf()) {
        best = std::min(best, nd.value);
        continue;
      }
      const auto f = static_cast<std::size_t>(nd.feature);
      bool l, r;
      if (s_[f].is_continuous()) {
        l = left_reachable(nd.threshold, d, f);
        r = right_reachable(nd.threshold, d, f);
      } else {
        l = (d.mask[f] & nd.left_labels) != 0;
        r = (d.mask[f] & ~nd.left_labels) != 0;
      }
      if (r) stack[top++] = static_cast<std::size_t>(nd.right);
      if (l) stack[top++] = static_cast<std::size_t>(nd.left);
    }
    return best;
  }

  [[nodiscard]] double tree_bound(const Domain& d) const {
    double m = -kInf;
    for (std::size_t i = 0; i < p_.ensembles.size(); ++i) {
      const auto& e = p_.ensembles[i];
      double lb = e.base_score;
      for (const auto& t : e.trees) lb += tree_min(t, d);
      m = std::max(m, p_.weights[i] * (lb - p_.norm_lo[i]) / p_.norm_den[i]);
    }
    return m;
  }

  [[nodiscard]] double alpha_upper(const Domain& d) const {
    const double cap = p_.alpha_cap();
    if (p_.data.empty()) return p_.mode == AcquisitionMode::MaxMin ? cap : 0.0;
    const bool euclid = p_.mode == AcquisitionMode::Chebyshev;
    const double nc = static_cast<double>(cont_.size());
    double best = cap;
    for (std::size_t di = 0; di < p_.data.size(); ++di) {
      const Point& q = p_.data[di];
      double cont = 0.0;
      for (std::size_t f : cont_) {
        const double w = s_[f].width();
        const double a = (d.lo[f] - q.values[f]) / w, b = (d.hi[f] - q.values[f]) / w;
        cont += euclid ? std::max(a * a, b * b) : std::max(std::abs(a), std::abs(b));
      }
      if (euclid) cont = std::min(cont, nc);
      double cat = 0.0;
      for (std::size_t f : cat_) {
        const std::size_t ql = q.label(f);
        if (euclid) {
          double m = 0.0;
          for (std::uint64_t bits = d.mask[f]; bits; bits &= bits - 1)
            m = std::max(m, p_.similarity.dissimilarity(
                                f, ql, static_cast<std::size_t>(std::countr_zero(bits))));
          cat += m;
        } else {
          cat += (d.mask[f] & ~(1ULL << ql)) ? 1.0 : 0.0;
        }
      }
      best = std::min(best, cont + cat);
    }
    return best;
  }

  // ---- structure queries -------------------------------------------------

  [[nodiscard]] bool threshold_interior(double v, const Domain& d, std::size_t f) const {
    return (v > d.lo[f] || (v == d.lo[f] && !d.lo_open[f])) && v < d.hi[f];
  }

  [[nodiscard]] std::size_t interior_count(const Domain& d, std::size_t f) const {
    const auto& v = p_.thresholds[f];
    auto first = std::lower_bound(v.begin(), v.end(), d.lo[f]);
    auto last = std::lower_bound(v.begin(), v.end(), d.hi[f]);
    std::size_t n = static_cast<std::size_t>(last - first);
    if (n && d.lo_open[f] && *first == d.lo[f]) --n;
    return n;
  }

  [[nodiscard]] bool single_cell(const Domain& d) const {
    for (std::size_t f : cat_)
      if (!d.label_fixed(f)) return false;
    for (std::size_t f : cont_)
      if (interior_count(d, f)) return false;
    return true;
  }

  [[nodiscard]] bool discrete_fixed(const Domain& d) const {
    for (std::size_t f : cat_)
      if (!d.label_fixed(f)) return false;
    for (std::size_t k = 0; k < s_.aux.size(); ++k)
      if (s_.aux[k].is_binary() && d.alo[k] != d.ahi[k]) return false;
    return true;
  }

  // Point strictly inside the node (lower end nudged when open).
  [[nodiscard]] double inside(double v, const Domain& d, std::size_t f) const {
    if (d.lo_open[f] && v <= d.lo[f]) return std::nextafter(d.lo[f], kInf);
    return std::clamp(v, d.lo[f], d.hi[f]);
  }

  [[nodiscard]] Point center(const Domain& d) const {
    Point pt;
    pt.values.resize(s_.size());
    for (std::size_t f = 0; f < s_.size(); ++f) {
      if (s_[f].is_continuous())
        pt.values[f] = inside(0.5 * (d.lo[f] + d.hi[f]), d, f);
      else
        pt.values[f] = static_cast<double>(d.fixed_label(f));
    }
    return pt;
  }

  // Corner of the box that is farthest, coordinate by coordinate, from the
  // data point closest to the box center.
  [[nodiscard]] Point far_corner(const Domain& d, const Point& c) const {
    Point pt = c;
    if (p_.data.empty()) return pt;
    std::size_t nearest = 0;
    double nd = kInf;
    for (std::size_t i = 0; i < p_.data.size(); ++i) {
      const double v = p_.distance_to(c, i);
      if (v < nd) {
        nd = v;
        nearest = i;
      }
    }
    const Point& q = p_.data[nearest];
    for (std::size_t f : cont_) {
      const double a = std::abs(d.lo[f] - q.values[f]), b = std::abs(d.hi[f] - q.values[f]);
      pt.values[f] = inside(b >= a ? d.hi[f] : d.lo[f], d, f);
    }
    if (p_.mode == AcquisitionMode::Chebyshev) {
      for (std::size_t f : cat_) {
        double best = -1.0;
        for (std::uint64_t bits = d.mask[f]; bits; bits &= bits - 1) {
          const auto j = static_cast<std::size_t>(std::countr_zero(bits));
          const double v = p_.similarity.dissimilarity(f, q.label(f), j);
          if (v > best) {
            best = v;
            pt.values[f] = static_cast<double>(j);
          }
        }
      }
    } else {
      for (std::size_t f : cat_) {
        for (std::uint64_t bits = d.mask[f]; bits; bits &= bits - 1) {
          const auto j = static_cast<std::size_t>(std::countr_zero(bits));
          pt.values[f] = static_cast<double>(j);
          if (j != q.label(f)) break;
        }
      }
    }
    return pt;
  }

  // ---- incumbents --------------------------------------------------------

  // Evaluates p; returns its value when feasible and not excluded.
  std::optional<double> try_point(const Point& pt) {
    ++evals_;
    if (p_.is_excluded(pt)) return std::nullopt;
    Point full = complete_aux(s_, pt);
    if (!check_constraints(s_, full, cfg_.feas_tol).feasible()) return std::nullopt;
    const double v = p_.value(full);
    if (v < inc_value_) {
      inc_value_ = v;
      inc_point_ = std::move(full);
    }
    return v;
  }

  [[nodiscard]] double violation(const Point& pt) const {
    return check_constraints(s_, complete_aux(s_, pt), cfg_.feas_tol).total_violation;
  }

  // Compass search over the free continuous coordinates of d. With
  // `repair` it minimizes total constraint violation until feasible;
  // otherwise it minimizes the acquisition over feasible points.
  Point pattern_search(Point pt, const Domain& d, bool repair, std::size_t& budget) {
    std::vector<std::size_t> coords;
    std::vector<double> step;
    for (std::size_t f : cont_)
      if (d.hi[f] > d.lo[f]) {
        coords.push_back(f);
        step.push_back(0.25 * (d.hi[f] - d.lo[f]));
      }
    if (coords.empty()) return pt;
    auto score = [&](const Point& q) -> double {
      if (repair) return violation(q);
      if (p_.is_excluded(q)) return kInf;
      Point full = complete_aux(s_, q);
      if (!check_constraints(s_, full, cfg_.feas_tol).feasible()) return kInf;
      const double v = p_.value(full);
      if (v < inc_value_) {
        inc_value_ = v;
        inc_point_ = std::move(full);
      }
      return v;
    };
    double cur = score(pt);
    if (repair && cur <= 0.0) return pt;
    while (budget > 0) {
      bool improved = false;
      for (std::size_t i = 0; i < coords.size() && budget > 0; ++i) {
        const std::size_t f = coords[i];
        for (double dir : {1.0, -1.0}) {
          if (budget == 0) break;
          Point q = pt;
          q.values[f] = inside(pt.values[f] + dir * step[i], d, f);
          if (q.values[f] == pt.values[f]) continue;
          --budget;
          const double v = score(q);
          if (v < cur - 1e-12 * (1.0 + std::abs(cur))) {
            pt = std::move(q);
            cur = v;
            improved = true;
            break;
          }
        }
        if (repair && cur <= 0.0) return pt;
      }
      if (!improved) {
        double widest = 0.0;
        for (std::size_t i = 0; i < step.size(); ++i) {
          step[i] *= 0.5;
          widest = std::max(widest, step[i] / s_[coords[i]].width());
        }
        if (widest < 1e-7) break;
      }
    }
    return pt;
  }

  void local_search(const Domain& d) {
    std::size_t budget = cfg_.heuristic_evals;
    std::uint64_t h = cfg_.seed ^ 0x5bd1e995ULL;
    for (std::size_t f : cat_) h = h * 1000003ULL + d.fixed_label(f) + 1;
    for (std::size_t k = 0; k < s_.aux.size(); ++k) h = h * 31ULL + static_cast<std::uint64_t>(d.alo[k] + 7);
    Rng rng(h);

    std::vector<Point> starts;
    // Matching data points, best first.
    std::vector<std::pair<double, std::size_t>> matches;
    for (std::size_t i = 0; i < p_.data.size(); ++i)
      if (d.contains(p_.data[i], s_)) matches.push_back({p_.value(p_.data[i]), i});
    std::sort(matches.begin(), matches.end());
    for (std::size_t i = 0; i < matches.size() && i < 2; ++i) starts.push_back(p_.data[matches[i].second]);
    starts.push_back(center(d));
    for (std::size_t r = 0; r < cfg_.heuristic_restarts; ++r) {
      Point q = center(d);
      for (std::size_t f : cont_) q.values[f] = inside(rng.uniform(d.lo[f], d.hi[f]), d, f);
      starts.push_back(std::move(q));
    }
    const std::size_t share = std::max<std::size_t>(1, budget / starts.size());
    for (auto& st : starts) {
      std::size_t b = share;
      if (violation(st) > 0.0) {
        std::size_t rb = share;
        st = pattern_search(st, d, true, rb);
        if (violation(st) > 0.0) continue;
      }
      pattern_search(st, d, false, b);
    }
  }

  // ---- node processing ---------------------------------------------------

  void process(const Node& node, double& unresolved) {
    const Domain& d = node.dom;
    const bool cell = single_cell(d);
    if (cell && !p_.excluded.empty() && p_.is_excluded(center(d))) return;

    const Point c = center(d);
    try_point(c);
    try_point(far_corner(d, c));

    if (discrete_fixed(d) && heuristic_runs_ < cfg_.heuristic_assignments) {
      std::vector<std::uint64_t> key;
      for (std::size_t f : cat_) key.push_back(d.mask[f]);
      for (std::size_t k = 0; k < s_.aux.size(); ++k)
        if (s_.aux[k].is_binary()) key.push_back(static_cast<std::uint64_t>(d.alo[k]));
      if (seen_.insert(key).second) {
        ++heuristic_runs_;
        local_search(d);
      }
    }

    if (cell && p_.mode == AcquisitionMode::Chebyshev && try_exact_cell(d)) return;

    // Branch: categorical labels.
    for (std::size_t f : cat_) {
      if (d.label_fixed(f)) continue;
      for (std::uint64_t bits = d.mask[f]; bits; bits &= bits - 1) {
        Domain child = d;
        child.mask[f] = bits & (~bits + 1);
        if (prop_.propagate(child)) push(std::move(child), node.depth + 1);
      }
      return;
    }
    // Binary aux.
    for (std::size_t k = 0; k < s_.aux.size(); ++k) {
      if (!s_.aux[k].is_binary() || d.alo[k] == d.ahi[k]) continue;
      for (double v : {0.0, 1.0}) {
        Domain child = d;
        child.alo[k] = child.ahi[k] = v;
        if (prop_.propagate(child)) push(std::move(child), node.depth + 1);
      }
      return;
    }
    // Tree thresholds.
    std::size_t best_f = SIZE_MAX, best_n = 0;
    for (std::size_t f : cont_) {
      const std::size_t n = interior_count(d, f);
      if (n > best_n) {
        best_n = n;
        best_f = f;
      }
    }
    if (best_f != SIZE_MAX) {
      const auto& v = p_.thresholds[best_f];
      std::vector<double> inner;
      for (double t : v)
        if (threshold_interior(t, d, best_f)) inner.push_back(t);
      const double t = inner[(inner.size() - 1) / 2];
      Domain left = d, right = d;
      left.hi[best_f] = t;
      right.lo[best_f] = t;
      right.lo_open[best_f] = 1;
      if (prop_.propagate(left)) push(std::move(left), node.depth + 1);
      if (prop_.propagate(right)) push(std::move(right), node.depth + 1);
      return;
    }
    // Spatial bisection of the widest (relative) feature.
    std::size_t wf = SIZE_MAX;
    double ww = 0.0;
    for (std::size_t f : cont_) {
      const double w = (d.hi[f] - d.lo[f]) / s_[f].width();
      if (w > ww) {
        ww = w;
        wf = f;
      }
    }
    if (wf == SIZE_MAX || ww < cfg_.min_width) {
      unresolved = std::min(unresolved, node.bound);
      return;
    }
    const double m = 0.5 * (d.lo[wf] + d.hi[wf]);
    Domain left = d, right = d;
    left.hi[wf] = m;
    right.lo[wf] = m;
    right.lo_open[wf] = 0;
    if (prop_.propagate(left)) push(std::move(left), node.depth + 1);
    if (prop_.propagate(right)) push(std::move(right), node.depth + 1);
  }

  // Closes a single-cell node exactly when at most two continuous features
  // are free and the user constraints hold on the whole box.
  bool try_exact_cell(const Domain& d) {
    std::vector<std::size_t> free;
    for (std::size_t f : cont_)
      if (d.hi[f] > d.lo[f]) free.push_back(f);
    if (free.size() > 2 || !prop_.entailed(d)) return false;

    Point base = center(d);
    const double lead = p_.scalarized(base);
    if (p_.kappa == 0.0) {
      try_point(base);
      return true;
    }
    std::vector<double> a, b;
    for (std::size_t f : free) {
      a.push_back(p_.normalized(f, d.lo[f]));
      b.push_back(p_.normalized(f, d.hi[f]));
    }
    std::vector<std::vector<double>> pts;
    std::vector<double> consts;
    for (std::size_t di = 0; di < p_.data.size(); ++di) {
      const Point& q = p_.data[di];
      std::vector<double> u;
      for (std::size_t f : free) u.push_back(p_.normalized(f, q.values[f]));
      double c = 0.0;
      for (std::size_t f : cont_) {
        if (d.hi[f] > d.lo[f]) continue;
        const double t = (d.lo[f] - q.values[f]) / s_[f].width();
        c += t * t;
      }
      for (std::size_t f : cat_) c += p_.similarity.dissimilarity(f, q.label(f), d.fixed_label(f));
      pts.push_back(std::move(u));
      consts.push_back(c);
    }
    const auto best = detail::power_cell_max(a, b, pts, consts);
    Point pt = base;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const std::size_t f = free[i];
      pt.values[f] = inside(s_[f].lower + best.arg[i] * s_[f].width(), d, f);
    }
    const double alpha = std::min(p_.alpha_cap(), best.value);
    const double exact = lead - (p_.kappa / n_) * alpha;
    const auto got = try_point(pt);
    // The nudge off an open lower end moves alpha by rounding error only.
    if (got && std::abs(*got - exact) > 1e-9 * (1.0 + std::abs(exact))) return false;
    return got.has_value();
  }

  const EncodedProblem& enc_;
  const AcquisitionProblem& p_;
  const DesignSpace& s_;
  SolveConfig cfg_;
  Propagator prop_;
  std::vector<std::size_t> cont_, cat_;
  double n_ = 1.0;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue_;
  std::uint64_t next_id_ = 0;
  std::size_t nodes_ = 0;
  std::size_t evals_ = 0;
  std::size_t heuristic_runs_ = 0;
  std::set<std::vector<std::uint64_t>> seen_;
  double inc_value_ = kInf;
  std::optional<Point> inc_point_;
};

inline SolveResult solve(const EncodedProblem& enc, const SolveConfig& cfg) {
  Solver s(enc, cfg);
  return s.run();
}

/// Lower bound of the objective over a node domain.
inline double bound_cell(const EncodedProblem& enc, const Domain& d, const SolveConfig& cfg = {}) {
  return Solver(enc, cfg).bound(d);
}

}  // namespace treemoo
