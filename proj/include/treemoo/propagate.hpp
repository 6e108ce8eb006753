#pragma once

// Box domains over features and aux variables, and interval bound
// propagation of the constraint grammar over them.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "treemoo/constraints.hpp"
#include "treemoo/design_space.hpp"

namespace treemoo {

/// Continuous features live in [lo, hi] or (lo, hi] (lo_open); categorical
/// features in a label bitmask; aux variables in [alo, ahi].
struct Domain {
  std::vector<double> lo, hi;
  std::vector<std::uint8_t> lo_open;
  std::vector<std::uint64_t> mask;
  std::vector<double> alo, ahi;

  static Domain root(const DesignSpace& s) {
    Domain d;
    const std::size_t n = s.size();
    d.lo.assign(n, 0.0);
    d.hi.assign(n, 0.0);
    d.lo_open.assign(n, 0);
    d.mask.assign(n, 0);
    for (std::size_t f = 0; f < n; ++f) {
      if (s[f].is_continuous()) {
        d.lo[f] = s[f].lower;
        d.hi[f] = s[f].upper;
      } else {
        const std::size_t k = s[f].num_labels();
        d.mask[f] = k == 64 ? ~0ULL : ((1ULL << k) - 1ULL);
      }
    }
    for (const auto& a : s.aux) {
      d.alo.push_back(a.lower);
      d.ahi.push_back(a.upper);
    }
    return d;
  }

  [[nodiscard]] bool label_fixed(std::size_t f) const { return std::popcount(mask[f]) == 1; }
  [[nodiscard]] std::size_t fixed_label(std::size_t f) const {
    return static_cast<std::size_t>(std::countr_zero(mask[f]));
  }
  [[nodiscard]] bool allows(std::size_t f, std::size_t label) const { return (mask[f] >> label) & 1ULL; }

  [[nodiscard]] std::pair<double, double> interval(const VarRef& r) const {
    switch (r.kind) {
      case VarRef::Kind::Feature: return {lo[r.index], hi[r.index]};
      case VarRef::Kind::Label: {
        const bool can = allows(r.index, r.label);
        const bool only = can && label_fixed(r.index);
        return {only ? 1.0 : 0.0, can ? 1.0 : 0.0};
      }
      case VarRef::Kind::Aux: return {alo[r.index], ahi[r.index]};
    }
    return {-kInf, kInf};
  }

  /// True when p lies inside the domain (respecting open lower ends).
  [[nodiscard]] bool contains(const Point& p, const DesignSpace& s) const {
    for (std::size_t f = 0; f < s.size(); ++f) {
      if (s[f].is_continuous()) {
        const double v = p.values[f];
        if (v > hi[f] || v < lo[f] || (lo_open[f] && v == lo[f])) return false;
      } else if (!allows(f, p.label(f))) {
        return false;
      }
    }
    return true;
  }
};

namespace detail {

struct Range {
  double lo = 0.0, hi = 0.0;
};

inline Range scale(Range r, double c) {
  if (c >= 0) return {r.lo * c, r.hi * c};
  return {r.hi * c, r.lo * c};
}

inline double mul0(double a, double b) {
  // 0 * inf = 0 for interval endpoints
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

inline Range product(Range a, Range b) {
  const double c[4] = {mul0(a.lo, b.lo), mul0(a.lo, b.hi), mul0(a.hi, b.lo), mul0(a.hi, b.hi)};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

inline Range square(Range a) {
  const double l2 = mul0(a.lo, a.lo), h2 = mul0(a.hi, a.hi);
  if (a.lo <= 0.0 && a.hi >= 0.0) return {0.0, std::max(l2, h2)};
  return {std::min(l2, h2), std::max(l2, h2)};
}

// Sum of ranges that tracks infinite contributions so the sum without one
// term stays finite when only that term is unbounded.
struct Activity {
  double lo = 0.0, hi = 0.0;
  int lo_inf = 0, hi_inf = 0;
  void add(Range r) {
    if (std::isinf(r.lo)) ++lo_inf; else lo += r.lo;
    if (std::isinf(r.hi)) ++hi_inf; else hi += r.hi;
  }
  [[nodiscard]] double min() const { return lo_inf ? -kInf : lo; }
  [[nodiscard]] double max() const { return hi_inf ? kInf : hi; }
  [[nodiscard]] double min_without(Range r) const {
    if (std::isinf(r.lo)) return lo_inf > 1 ? -kInf : lo;
    return lo_inf ? -kInf : lo - r.lo;
  }
  [[nodiscard]] double max_without(Range r) const {
    if (std::isinf(r.hi)) return hi_inf > 1 ? kInf : hi;
    return hi_inf ? kInf : hi - r.hi;
  }
};

}  // namespace detail

class Propagator {
 public:
  explicit Propagator(const DesignSpace& s, double feas_tol = kDefaultFeasTol)
      : space_(&s), tol_(feas_tol) {
    for (const auto& c : s.constraints) {
      if (const auto* q = std::get_if<QuadraticConstraint>(&c)) {
        std::map<VarRef, int> uses;
        for (const auto& t : q->terms) ++uses[t.var];
        for (const auto& t : q->quad) {
          ++uses[t.a];
          if (!(t.b == t.a)) ++uses[t.b];
        }
        std::vector<std::uint8_t> iso, lin;
        for (const auto& t : q->quad) iso.push_back(t.a == t.b && uses[t.a] == 1);
        for (const auto& t : q->terms) lin.push_back(uses[t.var] == 1);
        isolated_.push_back(std::move(iso));
        lin_isolated_.push_back(std::move(lin));
      } else {
        isolated_.emplace_back();
        lin_isolated_.emplace_back();
      }
    }
  }

  /// Tightens d to a fixpoint (bounded number of passes). Returns false when
  /// some constraint cannot be met inside d.
  bool propagate(Domain& d, int max_passes = 20) const {
    for (int pass = 0; pass < max_passes; ++pass) {
      changed_ = false;
      for (std::size_t ci = 0; ci < space_->constraints.size(); ++ci)
        if (!propagate_one(d, ci)) return false;
      if (!changed_) break;
    }
    return true;
  }

  /// True when every constraint holds at every point of d.
  [[nodiscard]] bool entailed(const Domain& d) const {
    for (std::size_t ci = 0; ci < space_->constraints.size(); ++ci)
      if (!entailed_one(d, ci)) return false;
    return true;
  }

 private:
  using Range = detail::Range;

  [[nodiscard]] Range range_of(const Domain& d, const VarRef& r) const {
    auto [l, h] = d.interval(r);
    return {l, h};
  }

  bool tighten(Domain& d, const VarRef& r, double nlo, double nhi) const {
    switch (r.kind) {
      case VarRef::Kind::Feature: {
        const std::size_t f = r.index;
        const double w = std::max(1.0, d.hi[f] - d.lo[f]);
        if (nlo > d.lo[f] + 1e-9 * w) {
          d.lo[f] = nlo;
          d.lo_open[f] = 0;
          changed_ = true;
        }
        if (nhi < d.hi[f] - 1e-9 * w) {
          d.hi[f] = nhi;
          changed_ = true;
        }
        if (d.lo[f] > d.hi[f]) {
          if (d.lo[f] - d.hi[f] > tol_ * std::max(1.0, std::abs(d.hi[f]))) return false;
          d.lo[f] = d.hi[f];
          d.lo_open[f] = 0;
        }
        if (d.lo_open[f] && d.lo[f] >= d.hi[f]) return false;
        return true;
      }
      case VarRef::Kind::Label: {
        const std::uint64_t bit = 1ULL << r.label;
        std::uint64_t m = d.mask[r.index];
        if (nlo > 1e-9) m &= bit;
        if (nhi < 1.0 - 1e-9) m &= ~bit;
        if (m != d.mask[r.index]) {
          d.mask[r.index] = m;
          changed_ = true;
        }
        return m != 0;
      }
      case VarRef::Kind::Aux: {
        const std::size_t k = r.index;
        if (space_->aux[k].is_binary()) {
          nlo = std::ceil(nlo - 1e-9);
          nhi = std::floor(nhi + 1e-9);
        }
        const double w = std::max(1.0, std::isfinite(d.ahi[k] - d.alo[k]) ? d.ahi[k] - d.alo[k] : 1.0);
        if (nlo > d.alo[k] + 1e-9 * w) {
          d.alo[k] = nlo;
          changed_ = true;
        }
        if (nhi < d.ahi[k] - 1e-9 * w) {
          d.ahi[k] = nhi;
          changed_ = true;
        }
        if (d.alo[k] > d.ahi[k]) {
          if (d.alo[k] - d.ahi[k] > tol_ * std::max(1.0, std::abs(d.ahi[k]))) return false;
          d.alo[k] = d.ahi[k];
        }
        return true;
      }
    }
    return true;
  }

  // Linear row sum coef*ref (sense) rhs.
  bool linear(Domain& d, const std::vector<LinTerm>& terms, Sense sense, double rhs) const {
    const double tol = tol_ * detail::linear_norm(terms);
    std::vector<Range> r;
    r.reserve(terms.size());
    detail::Activity act;
    for (const auto& t : terms) {
      r.push_back(detail::scale(range_of(d, t.var), t.coef));
      act.add(r.back());
    }
    const bool le = sense != Sense::Ge, ge = sense != Sense::Le;
    if (le && act.min() > rhs + tol) return false;
    if (ge && act.max() < rhs - tol) return false;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double c = terms[i].coef;
      if (c == 0.0) continue;
      double nlo = -kInf, nhi = kInf;
      if (le) {
        const double rest = act.min_without(r[i]);
        if (std::isfinite(rest)) {
          const double b = (rhs - rest) / c;
          if (c > 0) nhi = b; else nlo = b;
        }
      }
      if (ge) {
        const double rest = act.max_without(r[i]);
        if (std::isfinite(rest)) {
          const double b = (rhs - rest) / c;
          if (c > 0) nlo = std::max(nlo, b); else nhi = std::min(nhi, b);
        }
      }
      if (!tighten(d, terms[i].var, nlo, nhi)) return false;
    }
    return true;
  }

  [[nodiscard]] static bool linear_entailed(const Domain& d, const std::vector<LinTerm>& terms,
                                            Sense sense, double rhs) {
    detail::Activity act;
    for (const auto& t : terms) {
      auto [l, h] = d.interval(t.var);
      act.add(detail::scale({l, h}, t.coef));
    }
    if (sense != Sense::Ge && act.max() > rhs) return false;
    if (sense != Sense::Le && act.min() < rhs) return false;
    return true;
  }

  [[nodiscard]] static bool linear_violated(const Domain& d, const std::vector<LinTerm>& terms,
                                            Sense sense, double rhs, double tol) {
    detail::Activity act;
    for (const auto& t : terms) {
      auto [l, h] = d.interval(t.var);
      act.add(detail::scale({l, h}, t.coef));
    }
    if (sense != Sense::Ge && act.min() > rhs + tol) return true;
    if (sense != Sense::Le && act.max() < rhs - tol) return true;
    return false;
  }

  bool quadratic(Domain& d, const QuadraticConstraint& q, const std::vector<std::uint8_t>& iso,
                 const std::vector<std::uint8_t>& lin_iso) const {
    const double tol = tol_ * detail::quadratic_norm(q);
    std::vector<Range> lr, qr;
    detail::Activity act;
    for (const auto& t : q.terms) {
      lr.push_back(detail::scale(range_of(d, t.var), t.coef));
      act.add(lr.back());
    }
    for (const auto& t : q.quad) {
      const Range base = t.a == t.b ? detail::square(range_of(d, t.a))
                                    : detail::product(range_of(d, t.a), range_of(d, t.b));
      qr.push_back(detail::scale(base, t.coef));
      act.add(qr.back());
    }
    if (act.min() > q.rhs + tol) return false;

    for (std::size_t i = 0; i < q.terms.size(); ++i) {
      const auto& t = q.terms[i];
      if (!lin_iso[i] || t.coef == 0.0) continue;
      const double rest = act.min_without(lr[i]);
      if (!std::isfinite(rest)) continue;
      const double b = (q.rhs - rest) / t.coef;
      if (!(t.coef > 0 ? tighten(d, t.var, -kInf, b) : tighten(d, t.var, b, kInf))) return false;
    }
    for (std::size_t i = 0; i < q.quad.size(); ++i) {
      if (!iso[i]) continue;
      const auto& t = q.quad[i];
      const double rest = act.min_without(qr[i]);
      if (!std::isfinite(rest)) continue;
      const double room = q.rhs - rest;
      auto [l, h] = d.interval(t.a);
      if (t.coef > 0) {
        if (room < -tol) return false;
        const double s = std::sqrt(std::max(0.0, room) / t.coef);
        if (!tighten(d, t.a, -s, s)) return false;
      } else {
        const double need = -room / -t.coef;  // v^2 >= need
        if (need <= 0.0) continue;
        const double s = std::sqrt(need);
        const double slack = tol / std::max(1e-12, 2.0 * s * -t.coef) + 1e-12 * s;
        const bool left_ok = l <= -s + slack;
        const bool right_ok = h >= s - slack;
        if (!left_ok && !right_ok) return false;
        if (!left_ok) {
          if (!tighten(d, t.a, std::min(s, h), kInf)) return false;
        } else if (!right_ok) {
          if (!tighten(d, t.a, -kInf, std::max(-s, l))) return false;
        }
      }
    }
    return true;
  }

  [[nodiscard]] static bool quadratic_entailed(const Domain& d, const QuadraticConstraint& q) {
    detail::Activity act;
    for (const auto& t : q.terms) {
      auto [l, h] = d.interval(t.var);
      act.add(detail::scale({l, h}, t.coef));
    }
    for (const auto& t : q.quad) {
      auto [al, ah] = d.interval(t.a);
      auto [bl, bh] = d.interval(t.b);
      const Range base = t.a == t.b ? detail::square({al, ah}) : detail::product({al, ah}, {bl, bh});
      act.add(detail::scale(base, t.coef));
    }
    return act.max() <= q.rhs;
  }

  bool propagate_one(Domain& d, std::size_t ci) const {
    const Constraint& c = space_->constraints[ci];
    if (const auto* l = std::get_if<LinearConstraint>(&c)) return linear(d, l->terms, l->sense, l->rhs);
    if (const auto* q = std::get_if<QuadraticConstraint>(&c)) return quadratic(d, *q, isolated_[ci], lin_isolated_[ci]);
    if (const auto* ind = std::get_if<IndicatorConstraint>(&c)) {
      auto [gl, gh] = d.interval(ind->guard);
      const double on = ind->polarity ? 1.0 : 0.0;
      if (gl == gh) {
        if (gl == on) return linear(d, ind->then.terms, ind->then.sense, ind->then.rhs);
        return true;
      }
      if (linear_violated(d, ind->then.terms, ind->then.sense, ind->then.rhs,
                          tol_ * detail::linear_norm(ind->then.terms))) {
        return tighten(d, ind->guard, 1.0 - on, 1.0 - on);
      }
      return true;
    }
    const auto& p = std::get<BinaryProduct>(c);
    return linear(d, {{p.result, 1.0}, {p.a, -1.0}}, Sense::Le, 0.0) &&
           linear(d, {{p.result, 1.0}, {p.b, -1.0}}, Sense::Le, 0.0) &&
           linear(d, {{p.result, 1.0}, {p.a, -1.0}, {p.b, -1.0}}, Sense::Ge, -1.0);
  }

  [[nodiscard]] bool entailed_one(const Domain& d, std::size_t ci) const {
    const Constraint& c = space_->constraints[ci];
    if (const auto* l = std::get_if<LinearConstraint>(&c))
      return linear_entailed(d, l->terms, l->sense, l->rhs);
    if (const auto* q = std::get_if<QuadraticConstraint>(&c)) return quadratic_entailed(d, *q);
    if (const auto* ind = std::get_if<IndicatorConstraint>(&c)) {
      auto [gl, gh] = d.interval(ind->guard);
      const double on = ind->polarity ? 1.0 : 0.0;
      if (gl == gh && gl != on) return true;
      return linear_entailed(d, ind->then.terms, ind->then.sense, ind->then.rhs);
    }
    const auto& p = std::get<BinaryProduct>(c);
    for (const VarRef* r : {&p.result, &p.a, &p.b}) {
      auto [l, h] = d.interval(*r);
      if (l != h) return false;
    }
    const auto v = [&](const VarRef& r) { return d.interval(r).first; };
    return v(p.result) == v(p.a) * v(p.b);
  }

  const DesignSpace* space_;
  double tol_;
  std::vector<std::vector<std::uint8_t>> isolated_;
  std::vector<std::vector<std::uint8_t>> lin_isolated_;
  mutable bool changed_ = false;
};

}  // namespace treemoo
