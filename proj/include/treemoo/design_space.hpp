#pragma once

// Design space declaration: ordered features, auxiliary variables and the
// constraint grammar shared by the optimizer, the encoder and the baselines.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "treemoo/error.hpp"

namespace treemoo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kMaxLabels = 64;

enum class FeatureKind { Continuous, Categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::string> labels;

  static FeatureSpec continuous(std::string name, double lower, double upper) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::Continuous;
    f.lower = lower;
    f.upper = upper;
    return f;
  }

  static FeatureSpec categorical(std::string name, std::vector<std::string> labels) {
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::Categorical;
    f.labels = std::move(labels);
    return f;
  }

  [[nodiscard]] bool is_continuous() const { return kind == FeatureKind::Continuous; }
  [[nodiscard]] bool is_categorical() const { return kind == FeatureKind::Categorical; }
  [[nodiscard]] std::size_t num_labels() const { return labels.size(); }
  [[nodiscard]] double width() const { return upper - lower; }

  [[nodiscard]] std::optional<std::size_t> label_index(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
  }

  void validate() const {
    if (name.empty()) throw Error("feature with empty name");
    if (is_continuous()) {
      if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
        throw Error("feature '" + name + "': need finite bounds with lower < upper");
    } else {
      if (labels.empty()) throw Error("feature '" + name + "': empty label list");
      if (labels.size() > kMaxLabels)
        throw Error("feature '" + name + "': more than 64 labels is not supported");
      for (std::size_t a = 0; a < labels.size(); ++a)
        for (std::size_t b = a + 1; b < labels.size(); ++b)
          if (labels[a] == labels[b])
            throw Error("feature '" + name + "': duplicate label '" + labels[a] + "'");
    }
  }
};

/// Reference to a scalar that may appear in a constraint: the value of a
/// continuous feature, the 0/1 indicator "categorical feature == label", or
/// an auxiliary variable.
struct VarRef {
  enum class Kind : std::uint8_t { Feature, Label, Aux };
  Kind kind = Kind::Feature;
  std::size_t index = 0;
  std::size_t label = 0;

  static VarRef feature(std::size_t i) { return {Kind::Feature, i, 0}; }
  static VarRef label_of(std::size_t i, std::size_t j) { return {Kind::Label, i, j}; }
  static VarRef aux(std::size_t k) { return {Kind::Aux, k, 0}; }

  auto operator<=>(const VarRef&) const = default;
};

enum class Sense { Le, Eq, Ge };

inline const char* to_string(Sense s) {
  switch (s) {
    case Sense::Le: return "<=";
    case Sense::Eq: return "=";
    case Sense::Ge: return ">=";
  }
  return "?";
}

struct LinTerm {
  VarRef var;
  double coef = 0.0;
};

struct QuadTerm {
  VarRef a;
  VarRef b;
  double coef = 0.0;
};

struct LinearConstraint {
  std::string name;
  std::vector<LinTerm> terms;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

struct QuadraticConstraint {
  std::string name;
  std::vector<QuadTerm> quad;
  std::vector<LinTerm> terms;
  Sense sense = Sense::Le;
  double rhs = 0.0;
  bool nonconvex = false;
};

/// guard == polarity  =>  then
struct IndicatorConstraint {
  std::string name;
  VarRef guard;
  bool polarity = true;
  LinearConstraint then;
};

/// result = a * b for binary-valued references.
struct BinaryProduct {
  std::string name;
  VarRef result;
  VarRef a;
  VarRef b;
};

using Constraint =
    std::variant<LinearConstraint, QuadraticConstraint, IndicatorConstraint, BinaryProduct>;

inline const std::string& constraint_name(const Constraint& c) {
  return std::visit([](const auto& v) -> const std::string& { return v.name; }, c);
}

enum class AuxKind { Binary, NonNegative, Bounded };

struct AuxVar {
  std::string name;
  AuxKind kind = AuxKind::NonNegative;
  double lower = 0.0;
  double upper = kInf;

  static AuxVar binary(std::string name) { return {std::move(name), AuxKind::Binary, 0.0, 1.0}; }
  static AuxVar nonnegative(std::string name) {
    return {std::move(name), AuxKind::NonNegative, 0.0, kInf};
  }
  static AuxVar bounded(std::string name, double lo, double hi) {
    return {std::move(name), AuxKind::Bounded, lo, hi};
  }
  [[nodiscard]] bool is_binary() const { return kind == AuxKind::Binary; }
};

/// One assignment of the design variables. Categorical entries hold the label
/// index as an integral double; aux values are optional.
struct Point {
  std::vector<double> values;
  std::vector<double> aux;

  Point() = default;
  explicit Point(std::vector<double> v) : values(std::move(v)) {}

  [[nodiscard]] std::size_t label(std::size_t i) const {
    return static_cast<std::size_t>(values[i]);
  }
  bool operator==(const Point& o) const { return values == o.values; }
};

namespace detail {

// Eigenvalues of a small symmetric matrix (cyclic Jacobi).
inline std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  return ev;
}

}  // namespace detail

class DesignSpace {
 public:
  std::vector<FeatureSpec> features;
  std::vector<AuxVar> aux;
  std::vector<Constraint> constraints;

  DesignSpace() = default;
  explicit DesignSpace(std::vector<FeatureSpec> f) : features(std::move(f)) {}

  [[nodiscard]] std::size_t size() const { return features.size(); }
  [[nodiscard]] const FeatureSpec& operator[](std::size_t i) const { return features[i]; }

  std::size_t add_feature(FeatureSpec f) {
    features.push_back(std::move(f));
    return features.size() - 1;
  }
  std::size_t add_aux(AuxVar a) {
    aux.push_back(std::move(a));
    return aux.size() - 1;
  }
  void add_constraint(Constraint c) { constraints.push_back(std::move(c)); }

  [[nodiscard]] std::vector<std::size_t> continuous_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features.size(); ++i)
      if (features[i].is_continuous()) out.push_back(i);
    return out;
  }
  [[nodiscard]] std::vector<std::size_t> categorical_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < features.size(); ++i)
      if (features[i].is_categorical()) out.push_back(i);
    return out;
  }

  [[nodiscard]] std::optional<std::size_t> find_feature(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i)
      if (features[i].name == name) return i;
    return std::nullopt;
  }
  [[nodiscard]] std::optional<std::size_t> find_aux(const std::string& name) const {
    for (std::size_t i = 0; i < aux.size(); ++i)
      if (aux[i].name == name) return i;
    return std::nullopt;
  }

  /// Parses "feature", "feature=label" or "aux".
  [[nodiscard]] VarRef parse_ref(const std::string& text) const {
    const auto eq = text.find('=');
    if (eq != std::string::npos) {
      const std::string fname = text.substr(0, eq);
      const std::string lname = text.substr(eq + 1);
      auto fi = find_feature(fname);
      if (!fi || !features[*fi].is_categorical())
        throw Error("unknown categorical feature in reference '" + text + "'");
      auto li = features[*fi].label_index(lname);
      if (!li) throw Error("unknown label in reference '" + text + "'");
      return VarRef::label_of(*fi, *li);
    }
    if (auto fi = find_feature(text)) {
      if (!features[*fi].is_continuous())
        throw Error("categorical feature '" + text + "' must be referenced as name=label");
      return VarRef::feature(*fi);
    }
    if (auto ai = find_aux(text)) return VarRef::aux(*ai);
    throw Error("unknown variable '" + text + "'");
  }

  [[nodiscard]] std::string ref_name(const VarRef& r) const {
    switch (r.kind) {
      case VarRef::Kind::Feature: return features.at(r.index).name;
      case VarRef::Kind::Label:
        return features.at(r.index).name + "=" + features.at(r.index).labels.at(r.label);
      case VarRef::Kind::Aux: return aux.at(r.index).name;
    }
    return "?";
  }

  [[nodiscard]] bool is_binary_ref(const VarRef& r) const {
    if (r.kind == VarRef::Kind::Label) return true;
    if (r.kind == VarRef::Kind::Aux) return aux.at(r.index).is_binary();
    return false;
  }

  [[nodiscard]] bool valid_ref(const VarRef& r) const {
    switch (r.kind) {
      case VarRef::Kind::Feature:
        return r.index < features.size() && features[r.index].is_continuous();
      case VarRef::Kind::Label:
        return r.index < features.size() && features[r.index].is_categorical() &&
               r.label < features[r.index].num_labels();
      case VarRef::Kind::Aux: return r.index < aux.size();
    }
    return false;
  }

  void validate() const {
    if (features.empty()) throw Error("design space needs at least one feature");
    std::map<std::string, int> names;
    for (const auto& f : features) {
      f.validate();
      if (names[f.name]++) throw Error("duplicate variable name '" + f.name + "'");
    }
    for (const auto& a : aux) {
      if (a.name.empty()) throw Error("aux variable with empty name");
      if (names[a.name]++) throw Error("duplicate variable name '" + a.name + "'");
      if (!(a.lower <= a.upper)) throw Error("aux '" + a.name + "': lower > upper");
    }
    for (const auto& c : constraints) validate_constraint(c);
  }

  void validate_constraint(const Constraint& c) const {
    auto check_ref = [&](const VarRef& r, const std::string& cname) {
      if (!valid_ref(r))
        throw Error("constraint '" + cname + "' references an undeclared variable");
    };
    auto check_lin = [&](const LinearConstraint& l, const std::string& cname) {
      for (const auto& t : l.terms) check_ref(t.var, cname);
      if (!std::isfinite(l.rhs)) throw Error("constraint '" + cname + "': non-finite rhs");
    };
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, LinearConstraint>) {
            check_lin(v, v.name);
          } else if constexpr (std::is_same_v<T, QuadraticConstraint>) {
            for (const auto& t : v.terms) check_ref(t.var, v.name);
            for (const auto& q : v.quad) {
              check_ref(q.a, v.name);
              check_ref(q.b, v.name);
            }
            if (v.sense != Sense::Le)
              throw Error("quadratic constraint '" + v.name + "' must use sense <=");
            if (!v.nonconvex && !quadratic_is_convex(v))
              throw Error("quadratic constraint '" + v.name +
                          "' is nonconvex but not declared nonconvex");
          } else if constexpr (std::is_same_v<T, IndicatorConstraint>) {
            check_ref(v.guard, v.name);
            if (!is_binary_ref(v.guard))
              throw Error("indicator '" + v.name + "': guard must be a binary variable");
            check_lin(v.then, v.name);
          } else {
            for (const VarRef* r : {&v.result, &v.a, &v.b}) {
              check_ref(*r, v.name);
              if (!is_binary_ref(*r))
                throw Error("product '" + v.name + "': operands must be binary");
            }
          }
        },
        c);
  }

  [[nodiscard]] static bool quadratic_is_convex(const QuadraticConstraint& q) {
    std::vector<VarRef> vars;
    auto idx = [&](const VarRef& r) {
      auto it = std::find(vars.begin(), vars.end(), r);
      if (it != vars.end()) return static_cast<std::size_t>(it - vars.begin());
      vars.push_back(r);
      return vars.size() - 1;
    };
    for (const auto& t : q.quad) {
      idx(t.a);
      idx(t.b);
    }
    std::vector<std::vector<double>> m(vars.size(), std::vector<double>(vars.size(), 0.0));
    for (const auto& t : q.quad) {
      const auto a = idx(t.a), b = idx(t.b);
      if (a == b) {
        m[a][a] += t.coef;
      } else {
        m[a][b] += 0.5 * t.coef;
        m[b][a] += 0.5 * t.coef;
      }
    }
    for (double ev : detail::symmetric_eigenvalues(m))
      if (ev < -1e-12) return false;
    return true;
  }

  /// Checks bounds and label ranges of a point (constraints are checked
  /// separately, see constraints.hpp).
  [[nodiscard]] bool in_bounds(const Point& p, double tol = 0.0) const {
    if (p.values.size() != features.size()) return false;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto& f = features[i];
      const double v = p.values[i];
      if (!std::isfinite(v)) return false;
      if (f.is_continuous()) {
        if (v < f.lower - tol || v > f.upper + tol) return false;
      } else {
        if (v < 0 || v != std::floor(v) || v >= static_cast<double>(f.num_labels()))
          return false;
      }
    }
    return true;
  }
};

}  // namespace treemoo
