#pragma once

// Point-wise evaluation of the constraint grammar: scaled violations,
// feasibility checks and completion of auxiliary variables from features.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "treemoo/design_space.hpp"

namespace treemoo {

inline constexpr double kDefaultFeasTol = 1e-6;

/// Sorted, disjoint union of closed intervals.
class IntervalSet {
 public:
  using Piece = std::pair<double, double>;

  IntervalSet() : pieces_{{-kInf, kInf}} {}

  static IntervalSet empty_set() { return from_pieces({}); }
  static IntervalSet range(double lo, double hi) {
    if (lo > hi) return empty_set();
    return from_pieces({{lo, hi}});
  }
  static IntervalSet from_pieces(std::vector<Piece> pieces) {
    IntervalSet s;
    s.pieces_.clear();
    for (const auto& p : pieces)
      if (p.first <= p.second) s.pieces_.push_back(p);
    std::sort(s.pieces_.begin(), s.pieces_.end());
    return s;
  }

  [[nodiscard]] bool empty() const { return pieces_.empty(); }
  [[nodiscard]] const std::vector<Piece>& pieces() const { return pieces_; }
  [[nodiscard]] bool contains(double v) const {
    for (const auto& [lo, hi] : pieces_)
      if (v >= lo && v <= hi) return true;
    return false;
  }

  void intersect(const IntervalSet& o) {
    std::vector<Piece> out;
    for (const auto& [a, b] : pieces_)
      for (const auto& [c, d] : o.pieces_) {
        const double lo = std::max(a, c), hi = std::min(b, d);
        if (lo <= hi) out.push_back({lo, hi});
      }
    *this = from_pieces(std::move(out));
  }

 private:
  std::vector<Piece> pieces_;
};

namespace detail {

inline double ref_value(const Point& p, const VarRef& r) {
  switch (r.kind) {
    case VarRef::Kind::Feature: return p.values[r.index];
    case VarRef::Kind::Label: return p.label(r.index) == r.label ? 1.0 : 0.0;
    case VarRef::Kind::Aux:
      return r.index < p.aux.size() ? p.aux[r.index] : std::numeric_limits<double>::quiet_NaN();
  }
  return 0.0;
}

inline double row_violation(double lhs, Sense sense, double rhs) {
  double v = 0.0;
  switch (sense) {
    case Sense::Le: v = lhs - rhs; break;
    case Sense::Ge: v = rhs - lhs; break;
    case Sense::Eq: v = std::abs(lhs - rhs); break;
  }
  if (std::isnan(v)) return kInf;
  return std::max(0.0, v);
}

inline double linear_norm(const std::vector<LinTerm>& terms) {
  double s = 0.0;
  for (const auto& t : terms) s += t.coef * t.coef;
  return std::max(1.0, std::sqrt(s));
}

inline double quadratic_norm(const QuadraticConstraint& q) {
  double s = 0.0;
  for (const auto& t : q.terms) s += t.coef * t.coef;
  for (const auto& t : q.quad) s += t.coef * t.coef;
  return std::max(1.0, std::sqrt(s));
}

inline double linear_lhs(const Point& p, const std::vector<LinTerm>& terms) {
  double v = 0.0;
  for (const auto& t : terms) v += t.coef * ref_value(p, t.var);
  return v;
}

inline bool refs_aux_index(const VarRef& r, std::size_t k) {
  return r.kind == VarRef::Kind::Aux && r.index == k;
}

template <typename F>
void for_each_ref(const Constraint& c, F&& f) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearConstraint>) {
          for (const auto& t : v.terms) f(t.var);
        } else if constexpr (std::is_same_v<T, QuadraticConstraint>) {
          for (const auto& t : v.terms) f(t.var);
          for (const auto& q : v.quad) {
            f(q.a);
            f(q.b);
          }
        } else if constexpr (std::is_same_v<T, IndicatorConstraint>) {
          f(v.guard);
          for (const auto& t : v.then.terms) f(t.var);
        } else {
          f(v.result);
          f(v.a);
          f(v.b);
        }
      },
      c);
}

// Solution set of q v^2 + l v + c0 <= 0.
inline IntervalSet quadratic_le_zero(double q, double l, double c0) {
  if (q == 0.0) {
    if (l == 0.0) return c0 <= 0.0 ? IntervalSet() : IntervalSet::empty_set();
    const double r = -c0 / l;
    return l > 0 ? IntervalSet::range(-kInf, r) : IntervalSet::range(r, kInf);
  }
  const double disc = l * l - 4.0 * q * c0;
  if (disc < 0.0) return q > 0 ? IntervalSet::empty_set() : IntervalSet();
  const double sq = std::sqrt(disc);
  double r1 = (-l - sq) / (2.0 * q), r2 = (-l + sq) / (2.0 * q);
  if (r1 > r2) std::swap(r1, r2);
  if (q > 0) return IntervalSet::range(r1, r2);
  return IntervalSet::from_pieces({{-kInf, r1}, {r2, kInf}});
}

inline IntervalSet linear_solution(double a, double rest, Sense sense, double rhs) {
  // a v + rest (sense) rhs
  if (a == 0.0) {
    return row_violation(rest, sense, rhs) <= 0.0 ? IntervalSet() : IntervalSet::empty_set();
  }
  const double bound = (rhs - rest) / a;
  switch (sense) {
    case Sense::Eq: return IntervalSet::range(bound, bound);
    case Sense::Le: return a > 0 ? IntervalSet::range(-kInf, bound) : IntervalSet::range(bound, kInf);
    case Sense::Ge: return a > 0 ? IntervalSet::range(bound, kInf) : IntervalSet::range(-kInf, bound);
  }
  return IntervalSet();
}

}  // namespace detail

/// Violation of one constraint at a fully assigned point, divided by
/// max(1, ||coefficients||_2).
inline double scaled_violation(const Constraint& c, const Point& p) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearConstraint>) {
          return detail::row_violation(detail::linear_lhs(p, v.terms), v.sense, v.rhs) /
                 detail::linear_norm(v.terms);
        } else if constexpr (std::is_same_v<T, QuadraticConstraint>) {
          double lhs = detail::linear_lhs(p, v.terms);
          for (const auto& q : v.quad)
            lhs += q.coef * detail::ref_value(p, q.a) * detail::ref_value(p, q.b);
          return detail::row_violation(lhs, v.sense, v.rhs) / detail::quadratic_norm(v);
        } else if constexpr (std::is_same_v<T, IndicatorConstraint>) {
          const bool on = detail::ref_value(p, v.guard) > 0.5;
          if (on != v.polarity) return 0.0;
          return detail::row_violation(detail::linear_lhs(p, v.then.terms), v.then.sense,
                                       v.then.rhs) /
                 detail::linear_norm(v.then.terms);
        } else {
          const double r = detail::ref_value(p, v.result);
          const double a = detail::ref_value(p, v.a);
          const double b = detail::ref_value(p, v.b);
          const double d = std::abs(r - a * b);
          return std::isnan(d) ? kInf : d;
        }
      },
      c);
}

struct ConstraintReport {
  double max_violation = 0.0;
  double total_violation = 0.0;
  std::size_t violated = 0;
  [[nodiscard]] bool feasible() const { return violated == 0; }
};

/// Checks bounds of aux values and every constraint. `p.aux` must be filled
/// (see complete_aux) when the space declares aux variables.
inline ConstraintReport check_constraints(const DesignSpace& s, const Point& p,
                                          double tol = kDefaultFeasTol) {
  ConstraintReport r;
  auto account = [&](double v) {
    r.max_violation = std::max(r.max_violation, v);
    r.total_violation += v;
    if (v > tol) ++r.violated;
  };
  for (std::size_t k = 0; k < s.aux.size(); ++k) {
    const double v = k < p.aux.size() ? p.aux[k] : std::numeric_limits<double>::quiet_NaN();
    if (std::isnan(v)) {
      account(kInf);
      continue;
    }
    account(std::max({0.0, s.aux[k].lower - v, v - s.aux[k].upper}));
    if (s.aux[k].is_binary()) account(std::min(std::abs(v), std::abs(v - 1.0)));
  }
  for (const auto& c : s.constraints) account(scaled_violation(c, p));
  return r;
}

/// Fills `p.aux` from the features: products of binaries first, then each
/// remaining aux is set inside the solution set implied by the constraints in
/// which it is the only undetermined variable. When that set is empty the
/// least-violating candidate is used, so infeasible points still get a
/// meaningful violation measure.
inline Point complete_aux(const DesignSpace& s, Point p) {
  const std::size_t na = s.aux.size();
  p.aux.assign(na, std::numeric_limits<double>::quiet_NaN());
  if (na == 0) return p;

  std::vector<std::vector<std::size_t>> incidence(na);
  for (std::size_t ci = 0; ci < s.constraints.size(); ++ci) {
    detail::for_each_ref(s.constraints[ci], [&](const VarRef& r) {
      if (r.kind == VarRef::Kind::Aux &&
          (incidence[r.index].empty() || incidence[r.index].back() != ci))
        incidence[r.index].push_back(ci);
    });
  }
  auto known = [&](const VarRef& r) {
    return r.kind != VarRef::Kind::Aux || !std::isnan(p.aux[r.index]);
  };

  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& c : s.constraints) {
      const auto* bp = std::get_if<BinaryProduct>(&c);
      if (!bp || known(bp->result) || !known(bp->a) || !known(bp->b)) continue;
      const double v =
          (detail::ref_value(p, bp->a) > 0.5 && detail::ref_value(p, bp->b) > 0.5) ? 1.0 : 0.0;
      p.aux[bp->result.index] = v;
      progress = true;
    }
  }

  // Solution set of aux k implied by constraint c, or nullopt when c does not
  // constrain k alone yet.
  auto implied = [&](std::size_t k, const Constraint& c) -> std::optional<IntervalSet> {
    bool others_known = true;
    detail::for_each_ref(c, [&](const VarRef& r) {
      if (!detail::refs_aux_index(r, k) && !known(r)) others_known = false;
    });
    if (!others_known) return std::nullopt;
    auto lin_split = [&](const std::vector<LinTerm>& terms, double& a, double& rest) {
      a = 0.0;
      rest = 0.0;
      for (const auto& t : terms) {
        if (detail::refs_aux_index(t.var, k))
          a += t.coef;
        else
          rest += t.coef * detail::ref_value(p, t.var);
      }
    };
    return std::visit(
        [&](const auto& v) -> std::optional<IntervalSet> {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, LinearConstraint>) {
            double a, rest;
            lin_split(v.terms, a, rest);
            return detail::linear_solution(a, rest, v.sense, v.rhs);
          } else if constexpr (std::is_same_v<T, QuadraticConstraint>) {
            double l, rest;
            lin_split(v.terms, l, rest);
            double q = 0.0;
            for (const auto& t : v.quad) {
              const bool ia = detail::refs_aux_index(t.a, k), ib = detail::refs_aux_index(t.b, k);
              if (ia && ib)
                q += t.coef;
              else if (ia)
                l += t.coef * detail::ref_value(p, t.b);
              else if (ib)
                l += t.coef * detail::ref_value(p, t.a);
              else
                rest += t.coef * detail::ref_value(p, t.a) * detail::ref_value(p, t.b);
            }
            return detail::quadratic_le_zero(q, l, rest - v.rhs);
          } else if constexpr (std::is_same_v<T, IndicatorConstraint>) {
            if (detail::refs_aux_index(v.guard, k)) return std::nullopt;
            const bool on = detail::ref_value(p, v.guard) > 0.5;
            if (on != v.polarity) return IntervalSet();
            double a, rest;
            lin_split(v.then.terms, a, rest);
            return detail::linear_solution(a, rest, v.then.sense, v.then.rhs);
          } else {
            return std::nullopt;
          }
        },
        c);
  };

  // A pass that assigns nothing is followed by a forced pass, which sets
  // every still-blocked aux from the constraints it can already evaluate.
  bool force = false;
  while (true) {
    bool changed = false, pending = false;
    for (std::size_t k = 0; k < na; ++k) {
      if (!std::isnan(p.aux[k])) continue;
      IntervalSet set = IntervalSet::range(s.aux[k].lower, s.aux[k].upper);
      std::vector<double> candidates;
      bool blocked = false;
      for (std::size_t ci : incidence[k]) {
        auto sol = implied(k, s.constraints[ci]);
        if (!sol) {
          // Indicator guarded by this aux: handled when choosing the value.
          if (const auto* ind = std::get_if<IndicatorConstraint>(&s.constraints[ci]);
              ind && detail::refs_aux_index(ind->guard, k))
            continue;
          if (std::holds_alternative<BinaryProduct>(s.constraints[ci])) continue;
          blocked = true;
          if (!force) break;
          continue;
        }
        for (const auto& [lo, hi] : sol->pieces()) {
          if (std::isfinite(lo)) candidates.push_back(lo);
          if (std::isfinite(hi)) candidates.push_back(hi);
        }
        set.intersect(*sol);
      }
      if (blocked && !force) {
        pending = true;
        continue;
      }

      const AuxVar& av = s.aux[k];
      double value = 0.0;
      if (av.is_binary()) {
        value = set.contains(0.0) ? 0.0 : (set.contains(1.0) ? 1.0 : 0.0);
        if (!set.contains(0.0) && !set.contains(1.0)) {
          double best = kInf;
          for (double cand : {0.0, 1.0}) {
            p.aux[k] = cand;
            double viol = 0.0;
            for (std::size_t ci : incidence[k]) viol += scaled_violation(s.constraints[ci], p);
            if (viol < best) {
              best = viol;
              value = cand;
            }
          }
        }
      } else if (!set.empty()) {
        const auto& [lo, hi] = set.pieces().front();
        if (std::isfinite(lo) && std::isfinite(hi))
          value = 0.5 * (lo + hi);
        else if (std::isfinite(lo))
          value = lo;
        else if (std::isfinite(hi))
          value = hi;
        else
          value = std::clamp(0.0, av.lower, av.upper);
      } else {
        if (std::isfinite(av.lower)) candidates.push_back(av.lower);
        if (std::isfinite(av.upper)) candidates.push_back(av.upper);
        std::sort(candidates.begin(), candidates.end());
        // also midpoints between neighbours, where two conflicting bounds balance
        const std::size_t nc = candidates.size();
        for (std::size_t i = 0; i + 1 < nc; ++i)
          candidates.push_back(0.5 * (candidates[i] + candidates[i + 1]));
        double best = kInf;
        value = std::isfinite(av.lower) ? av.lower : 0.0;
        for (double cand : candidates) {
          cand = std::clamp(cand, av.lower, av.upper);
          p.aux[k] = cand;
          double viol = 0.0;
          for (std::size_t ci : incidence[k]) viol += scaled_violation(s.constraints[ci], p);
          if (viol < best) {
            best = viol;
            value = cand;
          }
        }
      }
      p.aux[k] = value;
      changed = true;
    }
    if (!pending) break;
    force = !changed;
  }
  return p;
}

inline ConstraintReport evaluate_feasibility(const DesignSpace& s, const Point& p,
                                             double tol = kDefaultFeasTol) {
  if (!s.in_bounds(p, tol)) {
    ConstraintReport r;
    r.violated = 1;
    r.max_violation = r.total_violation = kInf;
    for (std::size_t i = 0; i < s.size() && i < p.values.size(); ++i) {
      if (s[i].is_continuous()) {
        const double v = p.values[i];
        r.max_violation = r.total_violation =
            std::max({0.0, s[i].lower - v, v - s[i].upper});
      }
    }
    return r;
  }
  return check_constraints(s, complete_aux(s, p), tol);
}

inline bool is_feasible(const DesignSpace& s, const Point& p, double tol = kDefaultFeasTol) {
  return evaluate_feasibility(s, p, tol).feasible();
}

}  // namespace treemoo
