#pragma once

// Builds the explicit MIQP for an acquisition problem: tree ensemble rows,
// interval linking, exploration rows, the Chebyshev epigraph and the user
// constraints. Also maps real points to full model assignments and back.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "treemoo/acquisition.hpp"
#include "treemoo/constraints.hpp"
#include "treemoo/miqp_model.hpp"

namespace treemoo {

struct EncodedProblem {
  AcquisitionProblem problem;
  MiqpModel model;

  // Variable handles (model indices).
  std::vector<std::vector<std::size_t>> nu;                    // [feature][threshold or label]
  std::vector<std::size_t> x;                                  // [feature], continuous only
  std::vector<std::vector<std::vector<std::size_t>>> z;        // [objective][tree][node id]
  std::vector<std::size_t> mu_i;                               // [objective]
  std::size_t mu = 0;
  std::size_t alpha = 0;
  std::vector<std::size_t> alpha_n, alpha_c;                   // [data point]
  std::vector<std::vector<std::size_t>> k_plus, k_minus;       // [feature][data point]
  std::vector<std::size_t> aux;                                // [user aux]

  [[nodiscard]] std::size_t ref_var(const VarRef& r) const {
    switch (r.kind) {
      case VarRef::Kind::Feature: return x.at(r.index);
      case VarRef::Kind::Label: return nu.at(r.index).at(r.label);
      case VarRef::Kind::Aux: return aux.at(r.index);
    }
    return 0;
  }
};

namespace detail {

inline std::string num(std::size_t i) { return std::to_string(i); }

inline void add_variables(EncodedProblem& e) {
  const auto& p = e.problem;
  const auto& s = p.space;
  auto& m = e.model;
  e.nu.assign(s.size(), {});
  e.x.assign(s.size(), 0);
  for (std::size_t f = 0; f < s.size(); ++f) {
    const auto& fs = s[f];
    if (fs.is_continuous()) {
      e.x[f] = m.add_var("x[" + fs.name + "]", false, fs.lower, fs.upper);
      for (std::size_t j = 0; j < p.thresholds[f].size(); ++j)
        e.nu[f].push_back(m.add_var("nu[" + fs.name + "," + num(j) + "]", true, 0.0, 1.0));
    } else {
      for (const auto& label : fs.labels)
        e.nu[f].push_back(m.add_var("nu[" + fs.name + "=" + label + "]", true, 0.0, 1.0));
    }
  }
  for (const auto& a : s.aux)
    e.aux.push_back(m.add_var("aux[" + a.name + "]", a.is_binary(), a.lower, a.upper));
}

}  // namespace detail

/// Rows of one ensemble; returns the index of the prediction variable mu_o.
inline std::size_t encode_tree_ensemble(EncodedProblem& e, std::size_t o) {
  const auto& p = e.problem;
  const auto& ens = p.ensembles.at(o);
  auto& m = e.model;
  const std::string tag = detail::num(o);
  const std::size_t mu = m.add_var("mu[" + tag + "]", false, -kInf, kInf);
  e.z.resize(std::max(e.z.size(), o + 1));
  e.z[o].assign(ens.trees.size(), {});

  std::vector<ModelTerm> pred{{mu, 1.0}};
  for (std::size_t t = 0; t < ens.trees.size(); ++t) {
    const auto& tree = ens.trees[t];
    auto& zt = e.z[o][t];
    zt.assign(tree.nodes.size(), SIZE_MAX);
    std::vector<ModelTerm> convex;
    for (std::size_t l : tree.leaves()) {
      zt[l] = m.add_var("z[" + tag + "," + detail::num(t) + "," + detail::num(l) + "]", false, 0.0,
                        kInf);
      pred.push_back({zt[l], -tree.nodes[l].value});
      convex.push_back({zt[l], 1.0});
    }
    m.add_linear("tree_one_leaf[" + tag + "," + detail::num(t) + "]", std::move(convex), Sense::Eq,
                 1.0);

    // Leaves below each node, memoized.
    std::vector<std::vector<std::size_t>> below(tree.nodes.size());
    std::function<const std::vector<std::size_t>&(std::size_t)> leaves_of =
        [&](std::size_t n) -> const std::vector<std::size_t>& {
      if (!below[n].empty()) return below[n];
      const auto& nd = tree.nodes[n];
      if (nd.is_leaf()) {
        below[n] = {n};
        return below[n];
      }
      const auto& a = leaves_of(static_cast<std::size_t>(nd.left));
      const auto& b = leaves_of(static_cast<std::size_t>(nd.right));
      std::vector<std::size_t> all = a;
      all.insert(all.end(), b.begin(), b.end());
      below[n] = std::move(all);
      return below[n];
    };

    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
      const auto& nd = tree.nodes[n];
      if (nd.is_leaf()) continue;
      const auto f = static_cast<std::size_t>(nd.feature);
      std::vector<std::size_t> split_nu;
      if (p.space[f].is_continuous()) {
        const auto& v = p.thresholds[f];
        auto it = std::find(v.begin(), v.end(), nd.threshold);
        if (it == v.end())
          throw Error("ensemble " + tag + ": split on '" + p.space[f].name +
                      "' references a threshold missing from the global list");
        split_nu.push_back(e.nu[f][static_cast<std::size_t>(it - v.begin())]);
      } else {
        for (std::size_t j = 0; j < p.space[f].num_labels(); ++j)
          if ((nd.left_labels >> j) & 1ULL) split_nu.push_back(e.nu[f][j]);
      }
      const std::string sn = tag + "," + detail::num(t) + "," + detail::num(n);
      std::vector<ModelTerm> left, right;
      for (std::size_t l : leaves_of(static_cast<std::size_t>(nd.left))) left.push_back({zt[l], 1.0});
      for (std::size_t l : leaves_of(static_cast<std::size_t>(nd.right)))
        right.push_back({zt[l], 1.0});
      for (std::size_t v : split_nu) {
        left.push_back({v, -1.0});
        right.push_back({v, 1.0});
      }
      m.add_linear("tree_left[" + sn + "]", std::move(left), Sense::Le, 0.0);
      m.add_linear("tree_right[" + sn + "]", std::move(right), Sense::Le, 1.0);
    }
  }
  m.add_linear("tree_prediction[" + tag + "]", std::move(pred), Sense::Eq, ens.base_score);
  if (e.mu_i.size() <= o) e.mu_i.resize(o + 1);
  e.mu_i[o] = mu;
  return mu;
}

/// One-label and interval-ordering rows for every feature.
inline void encode_feature_structure(EncodedProblem& e) {
  const auto& s = e.problem.space;
  auto& m = e.model;
  for (std::size_t f = 0; f < s.size(); ++f) {
    if (s[f].is_categorical()) {
      std::vector<ModelTerm> t;
      for (std::size_t v : e.nu[f]) t.push_back({v, 1.0});
      m.add_linear("one_label[" + s[f].name + "]", std::move(t), Sense::Eq, 1.0);
    } else {
      for (std::size_t j = 0; j + 1 < e.nu[f].size(); ++j)
        m.add_linear("interval_order[" + s[f].name + "," + detail::num(j) + "]",
                     {{e.nu[f][j], 1.0}, {e.nu[f][j + 1], -1.0}}, Sense::Le, 0.0);
    }
  }
}

/// Bounds x by the interval selected through nu:
///   x >= L + sum_j (v_j - v_{j-1}) (1 - nu_j),  x <= U + sum_j (v_j - v_{j+1}) nu_j.
inline void encode_linking(EncodedProblem& e) {
  const auto& p = e.problem;
  auto& m = e.model;
  for (std::size_t f = 0; f < p.space.size(); ++f) {
    const auto& fs = p.space[f];
    if (!fs.is_continuous()) continue;
    const auto& v = p.thresholds[f];
    const std::size_t k = v.size();
    auto thr = [&](std::size_t j) {  // 0 -> L, k+1 -> U, else v_{j}
      if (j == 0) return fs.lower;
      if (j == k + 1) return fs.upper;
      return v[j - 1];
    };
    std::vector<ModelTerm> lo{{e.x[f], 1.0}}, hi{{e.x[f], 1.0}};
    double lo_rhs = fs.lower;
    for (std::size_t j = 1; j <= k; ++j) {
      const double step_down = thr(j) - thr(j - 1);
      lo.push_back({e.nu[f][j - 1], step_down});
      lo_rhs += step_down;
      hi.push_back({e.nu[f][j - 1], -(thr(j) - thr(j + 1))});
    }
    m.add_linear("link_lower[" + fs.name + "]", std::move(lo), Sense::Ge, lo_rhs);
    m.add_linear("link_upper[" + fs.name + "]", std::move(hi), Sense::Le, fs.upper);
  }
}

/// alpha <= alpha_N^d + alpha_C^d for every data point, with the squared
/// normalized distance row and the categorical dissimilarity row.
inline void encode_exploration(EncodedProblem& e) {
  const auto& p = e.problem;
  auto& m = e.model;
  const double nc = static_cast<double>(p.num_continuous());
  const double nk = static_cast<double>(p.num_categorical());
  e.alpha = m.add_var("alpha", false, 0.0, nc + nk);
  for (std::size_t d = 0; d < p.data.size(); ++d) {
    const Point& q = p.data[d];
    const std::string dn = detail::num(d);
    const std::size_t an = m.add_var("alpha_n[" + dn + "]", false, 0.0, nc);
    const std::size_t ac = m.add_var("alpha_c[" + dn + "]", false, 0.0, nk);
    e.alpha_n.push_back(an);
    e.alpha_c.push_back(ac);

    ModelRow qr;
    qr.kind = ModelRow::Kind::Quadratic;
    qr.name = "explore_continuous[" + dn + "]";
    qr.lin.push_back({an, 1.0});
    qr.sense = Sense::Le;
    for (std::size_t f = 0; f < p.space.size(); ++f) {
      const auto& fs = p.space[f];
      if (!fs.is_continuous()) continue;
      const double w2 = fs.width() * fs.width();
      const double c = q.values[f];
      qr.quad.push_back({e.x[f], e.x[f], -1.0 / w2});
      qr.lin.push_back({e.x[f], 2.0 * c / w2});
      qr.rhs += c * c / w2;
    }
    m.add_row(std::move(qr));

    std::vector<ModelTerm> cat{{ac, 1.0}};
    for (std::size_t f = 0; f < p.space.size(); ++f) {
      const auto& fs = p.space[f];
      if (!fs.is_categorical()) continue;
      for (std::size_t j = 0; j < fs.num_labels(); ++j) {
        const double coef = p.similarity.dissimilarity(f, q.label(f), j);
        if (coef != 0.0) cat.push_back({e.nu[f][j], -coef});
      }
    }
    m.add_linear("explore_categorical[" + dn + "]", std::move(cat), Sense::Le, 0.0);
    m.add_linear("explore_min[" + dn + "]", {{e.alpha, 1.0}, {an, -1.0}, {ac, -1.0}}, Sense::Le,
                 0.0);
  }
}

/// Epigraph rows mu >= w_i (mu_i - lo_i) / den_i and objective mu - (kappa/n) alpha.
inline void encode_chebyshev(EncodedProblem& e) {
  const auto& p = e.problem;
  auto& m = e.model;
  e.mu = m.add_var("mu", false, -kInf, kInf);
  for (std::size_t i = 0; i < p.ensembles.size(); ++i) {
    const double a = p.weights[i] / p.norm_den[i];
    m.add_linear("chebyshev[" + detail::num(i) + "]", {{e.mu, 1.0}, {e.mu_i[i], -a}}, Sense::Ge,
                 -a * p.norm_lo[i]);
  }
  const double n = static_cast<double>(p.num_features());
  m.objective = {{e.mu, 1.0}, {e.alpha, -p.kappa / n}};
}

/// Normalized Manhattan max-min rows (sample spreading):
///   alpha <= sum_i (k+_{i,d} + k-_{i,d}) + sum_cat (1 - nu_{i,X_d}),
///   (X_d - x)/W = k+ - k-, k+ k- = 0.
inline void encode_maxmin(EncodedProblem& e) {
  const auto& p = e.problem;
  auto& m = e.model;
  const double n = static_cast<double>(p.num_features());
  e.alpha = m.add_var("alpha_samp", false, 0.0, n);
  e.k_plus.assign(p.space.size(), {});
  e.k_minus.assign(p.space.size(), {});
  for (std::size_t d = 0; d < p.data.size(); ++d) {
    const Point& q = p.data[d];
    const std::string dn = detail::num(d);
    std::vector<ModelTerm> row{{e.alpha, 1.0}};
    double rhs = 0.0;
    for (std::size_t f = 0; f < p.space.size(); ++f) {
      const auto& fs = p.space[f];
      if (fs.is_continuous()) {
        const std::string vn = fs.name + "," + dn;
        const std::size_t kp = m.add_var("k_plus[" + vn + "]", false, 0.0, 1.0);
        const std::size_t km = m.add_var("k_minus[" + vn + "]", false, 0.0, 1.0);
        e.k_plus[f].push_back(kp);
        e.k_minus[f].push_back(km);
        m.add_linear("split_difference[" + vn + "]",
                     {{e.x[f], -1.0 / fs.width()}, {kp, -1.0}, {km, 1.0}}, Sense::Eq,
                     -q.values[f] / fs.width());
        ModelRow c;
        c.kind = ModelRow::Kind::Quadratic;
        c.name = "complementarity[" + vn + "]";
        c.quad.push_back({kp, km, 1.0});
        c.sense = Sense::Eq;
        m.add_row(std::move(c));
        row.push_back({kp, -1.0});
        row.push_back({km, -1.0});
      } else {
        row.push_back({e.nu[f][q.label(f)], 1.0});
        rhs += 1.0;
      }
    }
    m.add_linear("sample_distance[" + dn + "]", std::move(row), Sense::Le, rhs);
  }
  m.objective = {{e.alpha, -1.0}};
}

inline void encode_user_constraints(EncodedProblem& e) {
  const auto& s = e.problem.space;
  auto& m = e.model;
  auto lin_terms = [&](const std::vector<LinTerm>& ts) {
    std::vector<ModelTerm> out;
    for (const auto& t : ts) out.push_back({e.ref_var(t.var), t.coef});
    return out;
  };
  for (const auto& c : s.constraints) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          const std::string name = "user[" + v.name + "]";
          if constexpr (std::is_same_v<T, LinearConstraint>) {
            m.add_linear(name, lin_terms(v.terms), v.sense, v.rhs);
          } else if constexpr (std::is_same_v<T, QuadraticConstraint>) {
            ModelRow r;
            r.kind = ModelRow::Kind::Quadratic;
            r.name = name;
            r.lin = lin_terms(v.terms);
            for (const auto& q : v.quad) r.quad.push_back({e.ref_var(q.a), e.ref_var(q.b), q.coef});
            r.sense = v.sense;
            r.rhs = v.rhs;
            m.add_row(std::move(r));
          } else if constexpr (std::is_same_v<T, IndicatorConstraint>) {
            ModelRow r;
            r.kind = ModelRow::Kind::Indicator;
            r.name = name;
            r.guard = e.ref_var(v.guard);
            r.polarity = v.polarity;
            r.lin = lin_terms(v.then.terms);
            r.sense = v.then.sense;
            r.rhs = v.then.rhs;
            m.add_row(std::move(r));
          } else {
            const std::size_t res = e.ref_var(v.result), a = e.ref_var(v.a), b = e.ref_var(v.b);
            m.add_linear(name + ".le_a", {{res, 1.0}, {a, -1.0}}, Sense::Le, 0.0);
            m.add_linear(name + ".le_b", {{res, 1.0}, {b, -1.0}}, Sense::Le, 0.0);
            m.add_linear(name + ".ge_ab", {{res, 1.0}, {a, -1.0}, {b, -1.0}}, Sense::Ge, -1.0);
          }
        },
        c);
  }
}

/// Excludes every point whose nu values match the signature.
inline void encode_no_good(EncodedProblem& e, const CellSignature& sig, std::size_t index) {
  const auto& p = e.problem;
  std::vector<ModelTerm> t;
  double ones = 0.0;
  for (std::size_t f = 0; f < p.space.size(); ++f) {
    if (p.space[f].is_continuous()) {
      for (std::size_t j = 0; j < e.nu[f].size(); ++j) {
        // x in (v_k, v_{k+1}] gives nu_j = 1 exactly for j >= k.
        if (j >= sig[f]) {
          t.push_back({e.nu[f][j], -1.0});
          ones += 1.0;
        } else {
          t.push_back({e.nu[f][j], 1.0});
        }
      }
    } else {
      t.push_back({e.nu[f][sig[f]], -1.0});
      ones += 1.0;
    }
  }
  e.model.add_linear("no_good[" + detail::num(index) + "]", std::move(t), Sense::Ge, 1.0 - ones);
}

inline EncodedProblem encode(AcquisitionProblem problem) {
  EncodedProblem e;
  e.problem = std::move(problem);
  detail::add_variables(e);
  encode_feature_structure(e);
  if (e.problem.mode == AcquisitionMode::Chebyshev) {
    for (std::size_t o = 0; o < e.problem.ensembles.size(); ++o) encode_tree_ensemble(e, o);
    encode_linking(e);
    encode_exploration(e);
    encode_chebyshev(e);
  } else {
    encode_maxmin(e);
  }
  encode_user_constraints(e);
  for (std::size_t i = 0; i < e.problem.excluded.size(); ++i)
    encode_no_good(e, e.problem.excluded[i], i);
  return e;
}

/// Full model assignment induced by a real point: nu from the intervals
/// containing x, z from the reached leaves, epigraph and exploration
/// variables at their tightest values.
inline std::vector<double> complete_assignment(const EncodedProblem& e, const Point& point) {
  const auto& p = e.problem;
  const auto& s = p.space;
  std::vector<double> a(e.model.vars.size(), 0.0);
  const Point pt = point.aux.size() == s.aux.size() ? point : complete_aux(s, point);

  for (std::size_t f = 0; f < s.size(); ++f) {
    if (s[f].is_continuous()) {
      a[e.x[f]] = pt.values[f];
      for (std::size_t j = 0; j < e.nu[f].size(); ++j)
        a[e.nu[f][j]] = pt.values[f] <= p.thresholds[f][j] ? 1.0 : 0.0;
    } else {
      for (std::size_t j = 0; j < e.nu[f].size(); ++j) a[e.nu[f][j]] = pt.label(f) == j ? 1.0 : 0.0;
    }
  }
  for (std::size_t k = 0; k < e.aux.size(); ++k) a[e.aux[k]] = pt.aux[k];

  if (p.mode == AcquisitionMode::Chebyshev) {
    double mu = -kInf;
    for (std::size_t o = 0; o < p.ensembles.size(); ++o) {
      const auto& ens = p.ensembles[o];
      double pred = ens.base_score;
      for (std::size_t t = 0; t < ens.trees.size(); ++t) {
        const std::size_t leaf = ens.trees[t].leaf_of(pt, ens.features);
        a[e.z[o][t][leaf]] = 1.0;
        pred += ens.trees[t].nodes[leaf].value;
      }
      a[e.mu_i[o]] = pred;
      mu = std::max(mu, p.weights[o] * (pred - p.norm_lo[o]) / p.norm_den[o]);
    }
    a[e.mu] = mu;
    const double nc = static_cast<double>(p.num_continuous());
    double alpha = p.alpha_cap();
    for (std::size_t d = 0; d < p.data.size(); ++d) {
      const Point& q = p.data[d];
      double cont = 0.0, cat = 0.0;
      for (std::size_t f = 0; f < s.size(); ++f) {
        if (s[f].is_continuous()) {
          const double u = (pt.values[f] - q.values[f]) / s[f].width();
          cont += u * u;
        } else {
          cat += p.similarity.dissimilarity(f, q.label(f), pt.label(f));
        }
      }
      cont = std::min(cont, nc);
      a[e.alpha_n[d]] = cont;
      a[e.alpha_c[d]] = cat;
      alpha = std::min(alpha, cont + cat);
    }
    a[e.alpha] = alpha;
  } else {
    double alpha = p.alpha_cap();
    for (std::size_t d = 0; d < p.data.size(); ++d) {
      const Point& q = p.data[d];
      double dist = 0.0;
      for (std::size_t f = 0; f < s.size(); ++f) {
        if (s[f].is_continuous()) {
          const double diff = (q.values[f] - pt.values[f]) / s[f].width();
          a[e.k_plus[f][d]] = std::max(0.0, diff);
          a[e.k_minus[f][d]] = std::max(0.0, -diff);
          dist += std::abs(diff);
        } else {
          dist += q.label(f) == pt.label(f) ? 0.0 : 1.0;
        }
      }
      alpha = std::min(alpha, dist);
    }
    a[e.alpha] = alpha;
  }
  return a;
}

/// Reads the design point out of a model assignment: continuous values
/// directly, categorical labels as the argmax over nu.
inline Point decode(const EncodedProblem& e, const std::vector<double>& assignment) {
  const auto& s = e.problem.space;
  Point p;
  p.values.resize(s.size());
  for (std::size_t f = 0; f < s.size(); ++f) {
    if (s[f].is_continuous()) {
      p.values[f] = std::clamp(assignment[e.x[f]], s[f].lower, s[f].upper);
    } else {
      std::size_t best = 0;
      double bv = -kInf;
      for (std::size_t j = 0; j < e.nu[f].size(); ++j)
        if (assignment[e.nu[f][j]] > bv) {
          bv = assignment[e.nu[f][j]];
          best = j;
        }
      if (!(bv > 0.5))
        throw Error("decode: no label indicator active for feature '" + s[f].name + "'");
      p.values[f] = static_cast<double>(best);
    }
  }
  p.aux.resize(e.aux.size());
  for (std::size_t k = 0; k < e.aux.size(); ++k) p.aux[k] = assignment[e.aux[k]];
  return p;
}

}  // namespace treemoo
