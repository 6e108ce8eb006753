#pragma once

// Explicit mixed-integer quadratic model: named variables, linear /
// quadratic / indicator rows and a linear objective. Used for dumps, for
// checking solver incumbents row by row, and by the encoding tests.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "treemoo/design_space.hpp"
#include "treemoo/error.hpp"

namespace treemoo {

struct ModelVar {
  std::string name;
  bool binary = false;
  double lower = 0.0;
  double upper = kInf;
};

struct ModelTerm {
  std::size_t var = 0;
  double coef = 0.0;
};

struct ModelQuadTerm {
  std::size_t a = 0;
  std::size_t b = 0;
  double coef = 0.0;
};

struct ModelRow {
  enum class Kind { Linear, Quadratic, Indicator };
  Kind kind = Kind::Linear;
  std::string name;
  std::vector<ModelTerm> lin;
  std::vector<ModelQuadTerm> quad;
  Sense sense = Sense::Le;
  double rhs = 0.0;
  std::size_t guard = 0;  // indicator: guard == polarity => row
  bool polarity = true;
};

class MiqpModel {
 public:
  std::vector<ModelVar> vars;
  std::vector<ModelRow> rows;
  std::vector<ModelTerm> objective;
  double objective_constant = 0.0;

  std::size_t add_var(std::string name, bool binary, double lower, double upper) {
    const std::size_t id = vars.size();
    if (!index_.emplace(name, id).second) throw ContractViolation("duplicate model variable " + name);
    vars.push_back({std::move(name), binary, lower, upper});
    return id;
  }

  std::size_t add_row(ModelRow r) {
    rows.push_back(std::move(r));
    return rows.size() - 1;
  }

  std::size_t add_linear(std::string name, std::vector<ModelTerm> lin, Sense sense, double rhs) {
    ModelRow r;
    r.kind = ModelRow::Kind::Linear;
    r.name = std::move(name);
    r.lin = std::move(lin);
    r.sense = sense;
    r.rhs = rhs;
    return add_row(std::move(r));
  }

  [[nodiscard]] std::optional<std::size_t> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  [[nodiscard]] std::size_t at(const std::string& name) const {
    auto v = find(name);
    if (!v) throw ContractViolation("no model variable named " + name);
    return *v;
  }

  /// Rows whose name starts with `prefix`.
  [[nodiscard]] std::vector<std::size_t> rows_with_prefix(const std::string& prefix) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].name.rfind(prefix, 0) == 0) out.push_back(i);
    return out;
  }

  [[nodiscard]] static double activity(const ModelRow& r, const std::vector<double>& x) {
    double v = 0.0;
    for (const auto& t : r.lin) v += t.coef * x[t.var];
    for (const auto& q : r.quad) v += q.coef * x[q.a] * x[q.b];
    return v;
  }

  /// Violation divided by max(1, ||coefficients||_2); 0 for an inactive
  /// indicator.
  [[nodiscard]] static double row_violation(const ModelRow& r, const std::vector<double>& x) {
    if (r.kind == ModelRow::Kind::Indicator && ((x[r.guard] > 0.5) != r.polarity)) return 0.0;
    const double a = activity(r, x);
    double v = 0.0;
    switch (r.sense) {
      case Sense::Le: v = a - r.rhs; break;
      case Sense::Ge: v = r.rhs - a; break;
      case Sense::Eq: v = std::abs(a - r.rhs); break;
    }
    double norm = 0.0;
    for (const auto& t : r.lin) norm += t.coef * t.coef;
    for (const auto& q : r.quad) norm += q.coef * q.coef;
    return std::max(0.0, v) / std::max(1.0, std::sqrt(norm));
  }

  [[nodiscard]] double max_violation(const std::vector<double>& x) const {
    if (x.size() != vars.size()) throw ContractViolation("assignment size differs from model");
    double m = 0.0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const auto& v = vars[i];
      if (std::isnan(x[i])) return kInf;
      m = std::max({m, v.lower - x[i], x[i] - v.upper});
      if (v.binary) m = std::max(m, std::min(std::abs(x[i]), std::abs(x[i] - 1.0)));
    }
    for (const auto& r : rows) m = std::max(m, row_violation(r, x));
    return m;
  }

  [[nodiscard]] double objective_value(const std::vector<double>& x) const {
    double v = objective_constant;
    for (const auto& t : objective) v += t.coef * x[t.var];
    return v;
  }

  /// Human-readable listing: variables, objective, rows.
  [[nodiscard]] std::string listing() const {
    std::ostringstream os;
    os.precision(17);
    os << "variables " << vars.size() << "\n";
    for (const auto& v : vars)
      os << "  " << (v.binary ? "bin  " : "cont ") << v.name << " [" << v.lower << ", " << v.upper
         << "]\n";
    os << "minimize";
    if (objective_constant != 0.0) os << " " << objective_constant;
    for (const auto& t : objective) os << " " << signed_coef(t.coef) << " " << vars[t.var].name;
    os << "\nrows " << rows.size() << "\n";
    for (const auto& r : rows) {
      os << "  " << r.name << ": ";
      if (r.kind == ModelRow::Kind::Indicator)
        os << vars[r.guard].name << " = " << (r.polarity ? 1 : 0) << " -> ";
      for (const auto& q : r.quad)
        os << signed_coef(q.coef) << " " << vars[q.a].name << "*" << vars[q.b].name << " ";
      for (const auto& t : r.lin) os << signed_coef(t.coef) << " " << vars[t.var].name << " ";
      os << to_string(r.sense) << " " << r.rhs << "\n";
    }
    return os.str();
  }

 private:
  static std::string signed_coef(double c) {
    std::ostringstream s;
    s.precision(17);
    s << (c < 0 ? "- " : "+ ") << std::abs(c);
    return s.str();
  }

  std::map<std::string, std::size_t> index_;
};

}  // namespace treemoo
