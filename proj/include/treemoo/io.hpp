#pragma once

// JSON persistence for design spaces, tree ensembles, datasets, acquisition
// fixtures and run records, plus tab-separated front files.
//
// Variables inside constraints are written by name: a continuous feature or
// aux variable by its name, a categorical label indicator as "feature=label".
// Infinite bounds are written as null.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "treemoo/acquisition.hpp"
#include "treemoo/gbrt.hpp"
#include "treemoo/metrics.hpp"
#include "treemoo/record.hpp"
#include "treemoo/similarity.hpp"
#include "treemoo/solver.hpp"

namespace treemoo::io {

using json = nlohmann::json;

inline constexpr const char* kSpaceSchema = "treemoo.space/1";
inline constexpr const char* kEnsembleSchema = "treemoo.ensemble/1";
inline constexpr const char* kDataSchema = "treemoo.data/1";
inline constexpr const char* kFixtureSchema = "treemoo.fixture/1";
inline constexpr const char* kRecordSchema = "treemoo.record/1";
inline constexpr const char* kFrontSchema = "treemoo.front/1";

// ---- helpers --------------------------------------------------------------

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Reads a number; null maps to `null_value`.
inline double get_num(const json& j, const std::string& key, double null_value) {
  if (!j.contains(key)) throw Error("missing field '" + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return null_value;
  if (!v.is_number()) throw Error("field '" + key + "' must be a number");
  return v.get<double>();
}

inline void check_schema(const json& j, const char* expected) {
  if (!j.is_object()) throw Error(std::string("expected a JSON object for ") + expected);
  if (j.contains("schema") && j.at("schema") != expected)
    throw Error("schema mismatch: expected '" + std::string(expected) + "', found " +
                j.at("schema").dump());
}

/// Parses JSON text; syntax errors name the line and column.
inline json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                ": JSON syntax error");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) { return parse_text(read_file(path), path); }

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

// ---- design space ---------------------------------------------------------

inline json to_json(const FeatureSpec& f) {
  json j{{"name", f.name}};
  if (f.is_continuous()) {
    j["type"] = "continuous";
    j["lower"] = f.lower;
    j["upper"] = f.upper;
  } else {
    j["type"] = "categorical";
    j["labels"] = f.labels;
  }
  return j;
}

inline FeatureSpec feature_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  const auto name = j.at("name").get<std::string>();
  if (type == "continuous")
    return FeatureSpec::continuous(name, j.at("lower").get<double>(), j.at("upper").get<double>());
  if (type == "categorical")
    return FeatureSpec::categorical(name, j.at("labels").get<std::vector<std::string>>());
  throw Error("feature '" + name + "': unknown type '" + type + "'");
}

inline const char* aux_kind_name(AuxKind k) {
  switch (k) {
    case AuxKind::Binary: return "binary";
    case AuxKind::NonNegative: return "nonnegative";
    case AuxKind::Bounded: return "bounded";
  }
  return "?";
}

inline Sense parse_sense(const std::string& s) {
  if (s == "<=") return Sense::Le;
  if (s == "=" || s == "==") return Sense::Eq;
  if (s == ">=") return Sense::Ge;
  throw Error("unknown constraint sense '" + s + "'");
}

inline json terms_json(const DesignSpace& s, const std::vector<LinTerm>& terms) {
  json a = json::array();
  for (const auto& t : terms) a.push_back(json::array({s.ref_name(t.var), t.coef}));
  return a;
}

inline std::vector<LinTerm> terms_from_json(const DesignSpace& s, const json& a) {
  std::vector<LinTerm> out;
  for (const auto& t : a) out.push_back({s.parse_ref(t.at(0).get<std::string>()), t.at(1).get<double>()});
  return out;
}

inline json linear_json(const DesignSpace& s, const LinearConstraint& c) {
  return {{"type", "linear"},
          {"name", c.name},
          {"terms", terms_json(s, c.terms)},
          {"sense", to_string(c.sense)},
          {"rhs", c.rhs}};
}

inline LinearConstraint linear_from_json(const DesignSpace& s, const json& j) {
  return {j.value("name", ""), terms_from_json(s, j.at("terms")),
          parse_sense(j.at("sense").get<std::string>()), j.at("rhs").get<double>()};
}

inline json to_json(const DesignSpace& s, const Constraint& c) {
  return std::visit(
      [&](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearConstraint>) {
          return linear_json(s, v);
        } else if constexpr (std::is_same_v<T, QuadraticConstraint>) {
          json q = json::array();
          for (const auto& t : v.quad)
            q.push_back(json::array({s.ref_name(t.a), s.ref_name(t.b), t.coef}));
          return {{"type", "quadratic"},       {"name", v.name},
                  {"quad", q},                 {"terms", terms_json(s, v.terms)},
                  {"sense", to_string(v.sense)}, {"rhs", v.rhs},
                  {"nonconvex", v.nonconvex}};
        } else if constexpr (std::is_same_v<T, IndicatorConstraint>) {
          return {{"type", "indicator"},
                  {"name", v.name},
                  {"guard", s.ref_name(v.guard)},
                  {"polarity", v.polarity},
                  {"then", linear_json(s, v.then)}};
        } else {
          return {{"type", "product"},
                  {"name", v.name},
                  {"result", s.ref_name(v.result)},
                  {"a", s.ref_name(v.a)},
                  {"b", s.ref_name(v.b)}};
        }
      },
      c);
}

inline Constraint constraint_from_json(const DesignSpace& s, const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") return linear_from_json(s, j);
  if (type == "quadratic") {
    QuadraticConstraint q;
    q.name = j.value("name", "");
    for (const auto& t : j.at("quad"))
      q.quad.push_back({s.parse_ref(t.at(0).get<std::string>()),
                        s.parse_ref(t.at(1).get<std::string>()), t.at(2).get<double>()});
    q.terms = terms_from_json(s, j.value("terms", json::array()));
    q.sense = parse_sense(j.at("sense").get<std::string>());
    q.rhs = j.at("rhs").get<double>();
    q.nonconvex = j.value("nonconvex", false);
    return q;
  }
  if (type == "indicator")
    return IndicatorConstraint{j.value("name", ""), s.parse_ref(j.at("guard").get<std::string>()),
                               j.value("polarity", true), linear_from_json(s, j.at("then"))};
  if (type == "product")
    return BinaryProduct{j.value("name", ""), s.parse_ref(j.at("result").get<std::string>()),
                         s.parse_ref(j.at("a").get<std::string>()),
                         s.parse_ref(j.at("b").get<std::string>())};
  throw Error("unknown constraint type '" + type + "'");
}

inline json to_json(const DesignSpace& s) {
  json j{{"schema", kSpaceSchema}};
  j["features"] = json::array();
  for (const auto& f : s.features) j["features"].push_back(to_json(f));
  j["aux"] = json::array();
  for (const auto& a : s.aux)
    j["aux"].push_back({{"name", a.name},
                        {"kind", aux_kind_name(a.kind)},
                        {"lower", num(a.lower)},
                        {"upper", num(a.upper)}});
  j["constraints"] = json::array();
  for (const auto& c : s.constraints) j["constraints"].push_back(to_json(s, c));
  return j;
}

inline DesignSpace space_from_json(const json& j) {
  check_schema(j, kSpaceSchema);
  try {
    DesignSpace s;
    for (const auto& f : j.at("features")) s.add_feature(feature_from_json(f));
    for (const auto& a : j.value("aux", json::array())) {
      const auto kind = a.at("kind").get<std::string>();
      const auto name = a.at("name").get<std::string>();
      if (kind == "binary")
        s.add_aux(AuxVar::binary(name));
      else if (kind == "nonnegative")
        s.add_aux(AuxVar::nonnegative(name));
      else if (kind == "bounded")
        s.add_aux(AuxVar::bounded(name, get_num(a, "lower", -kInf), get_num(a, "upper", kInf)));
      else
        throw Error("aux '" + name + "': unknown kind '" + kind + "'");
    }
    for (const auto& c : j.value("constraints", json::array()))
      s.add_constraint(constraint_from_json(s, c));
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("design space: ") + e.what());
  }
}

// ---- points and datasets --------------------------------------------------

/// Categorical entries are written as label strings.
inline json point_json(const DesignSpace& s, const Point& p) {
  json a = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].is_continuous())
      a.push_back(p.values[i]);
    else
      a.push_back(s[i].labels.at(p.label(i)));
  }
  return a;
}

inline Point point_from_json(const DesignSpace& s, const json& a) {
  if (!a.is_array() || a.size() != s.size())
    throw Error("point must be an array of " + std::to_string(s.size()) + " entries");
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].is_continuous()) {
      v[i] = a[i].get<double>();
    } else {
      const auto idx = s[i].label_index(a[i].get<std::string>());
      if (!idx) throw Error("unknown label " + a[i].dump() + " for feature '" + s[i].name + "'");
      v[i] = static_cast<double>(*idx);
    }
  }
  return Point(std::move(v));
}

inline json to_json(const DesignSpace& s, const DataSet& d) {
  json j{{"schema", kDataSchema}, {"points", json::array()}, {"targets", d.targets}};
  for (const auto& p : d.points) j["points"].push_back(point_json(s, p));
  return j;
}

inline DataSet dataset_from_json(const DesignSpace& s, const json& j) {
  check_schema(j, kDataSchema);
  try {
    DataSet d;
    const auto& pts = j.at("points");
    const auto& ys = j.at("targets");
    if (pts.size() != ys.size()) throw Error("dataset: points and targets differ in length");
    for (std::size_t r = 0; r < pts.size(); ++r)
      d.add(point_from_json(s, pts[r]), ys[r].get<std::vector<double>>());
    d.validate(s);
    return d;
  } catch (const json::exception& e) {
    throw Error(std::string("dataset: ") + e.what());
  }
}

// ---- tree ensembles -------------------------------------------------------

/// Nodes reference features by name. Categorical splits list the labels that
/// go left.
inline json to_json(const TreeEnsemble& e) {
  json j{{"schema", kEnsembleSchema}, {"features", json::array()}, {"base_score", e.base_score}};
  for (const auto& f : e.features) j["features"].push_back(to_json(f));
  j["trees"] = json::array();
  for (const auto& t : e.trees) {
    json nodes = json::array();
    for (const auto& nd : t.nodes) {
      if (nd.is_leaf()) {
        nodes.push_back({{"leaf", nd.value}});
        continue;
      }
      const auto& f = e.features[static_cast<std::size_t>(nd.feature)];
      json n{{"feature", f.name}, {"left", nd.left}, {"right", nd.right}};
      if (f.is_continuous()) {
        n["threshold"] = nd.threshold;
      } else {
        json labels = json::array();
        for (std::size_t k = 0; k < f.num_labels(); ++k)
          if ((nd.left_labels >> k) & 1ULL) labels.push_back(f.labels[k]);
        n["left_labels"] = labels;
      }
      nodes.push_back(n);
    }
    j["trees"].push_back({{"nodes", nodes}});
  }
  if (!e.training_mse.empty()) j["training_mse"] = e.training_mse;
  return j;
}

inline TreeEnsemble ensemble_from_json(const json& j) {
  check_schema(j, kEnsembleSchema);
  try {
    TreeEnsemble e;
    for (const auto& f : j.at("features")) e.features.push_back(feature_from_json(f));
    e.base_score = j.value("base_score", 0.0);
    auto feature_index = [&](const std::string& name) {
      for (std::size_t i = 0; i < e.features.size(); ++i)
        if (e.features[i].name == name) return static_cast<std::int32_t>(i);
      throw Error("ensemble: node references unknown feature '" + name + "'");
    };
    for (const auto& tj : j.at("trees")) {
      Tree t;
      for (const auto& nj : tj.at("nodes")) {
        TreeNode nd;
        if (nj.contains("leaf")) {
          nd.value = nj.at("leaf").get<double>();
        } else {
          nd.feature = feature_index(nj.at("feature").get<std::string>());
          nd.left = nj.at("left").get<std::int32_t>();
          nd.right = nj.at("right").get<std::int32_t>();
          const auto& f = e.features[static_cast<std::size_t>(nd.feature)];
          if (f.is_continuous()) {
            nd.threshold = nj.at("threshold").get<double>();
          } else {
            for (const auto& l : nj.at("left_labels")) {
              const auto idx = f.label_index(l.get<std::string>());
              if (!idx) throw Error("ensemble: unknown label " + l.dump());
              nd.left_labels |= 1ULL << *idx;
            }
          }
        }
        t.nodes.push_back(nd);
      }
      e.trees.push_back(std::move(t));
    }
    if (j.contains("training_mse")) e.training_mse = j.at("training_mse").get<std::vector<double>>();
    e.validate();
    return e;
  } catch (const json::exception& ex) {
    throw Error(std::string("ensemble: ") + ex.what());
  }
}

// ---- solver settings ------------------------------------------------------

inline json to_json(const SolveConfig& c) {
  return {{"rel_gap", c.rel_gap},
          {"abs_gap", c.abs_gap},
          {"feas_tol", c.feas_tol},
          {"time_limit_secs", c.time_limit_secs},
          {"node_limit", c.node_limit},
          {"seed", c.seed},
          {"heuristic_evals", c.heuristic_evals},
          {"heuristic_assignments", c.heuristic_assignments},
          {"heuristic_restarts", c.heuristic_restarts}};
}

/// Overwrites the fields present in `j`; unknown keys are rejected.
inline void update_from_json(SolveConfig& c, const json& j, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (k == "rel_gap") c.rel_gap = v.get<double>();
    else if (k == "abs_gap") c.abs_gap = v.get<double>();
    else if (k == "feas_tol") c.feas_tol = v.get<double>();
    else if (k == "time_limit_secs") c.time_limit_secs = v.get<double>();
    else if (k == "node_limit") c.node_limit = v.get<std::size_t>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else if (k == "heuristic_evals") c.heuristic_evals = v.get<std::size_t>();
    else if (k == "heuristic_assignments") c.heuristic_assignments = v.get<std::size_t>();
    else if (k == "heuristic_restarts") c.heuristic_restarts = v.get<std::size_t>();
    else throw Error(where + ": unknown key '" + k + "'");
  }
  c.validate();
}

inline json to_json(const GbrtConfig& c) {
  return {{"num_trees", c.num_trees},
          {"max_depth", c.max_depth},
          {"min_data_per_leaf", c.min_data_per_leaf},
          {"learning_rate", c.learning_rate},
          {"min_relative_gain", c.min_relative_gain},
          {"seed", c.seed}};
}

inline void update_from_json(GbrtConfig& c, const json& j, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (k == "num_trees") c.num_trees = v.get<std::size_t>();
    else if (k == "max_depth") c.max_depth = v.get<std::size_t>();
    else if (k == "min_data_per_leaf") c.min_data_per_leaf = v.get<std::size_t>();
    else if (k == "learning_rate") c.learning_rate = v.get<double>();
    else if (k == "min_relative_gain") c.min_relative_gain = v.get<double>();
    else if (k == "seed") c.seed = v.get<std::uint64_t>();
    else throw Error(where + ": unknown key '" + k + "'");
  }
  c.validate();
}

// ---- acquisition fixtures -------------------------------------------------

/// A self-contained acquisition problem: space, data, one ensemble per
/// objective, weights, kappa, similarity and solver settings. Without
/// "ensembles" the fixture is a max-min sampling problem over the data points.
struct Fixture {
  AcquisitionProblem problem;
  SolveConfig solve;
};

inline Fixture fixture_from_json(const json& j) {
  check_schema(j, kFixtureSchema);
  try {
    Fixture fx;
    const DesignSpace space = space_from_json(j.at("space"));
    const DataSet data = dataset_from_json(space, j.at("data"));
    if (j.contains("solve")) update_from_json(fx.solve, j.at("solve"), "fixture solve");
    const std::string mode = j.value("mode", "chebyshev");
    if (mode == "maxmin") {
      fx.problem = make_maxmin_problem(space, data.points);
      return fx;
    }
    if (mode != "chebyshev") throw Error("fixture: unknown mode '" + mode + "'");
    std::vector<TreeEnsemble> ens;
    for (const auto& e : j.at("ensembles")) ens.push_back(ensemble_from_json(e));
    std::optional<NormalizationBounds> user;
    if (j.contains("bounds"))
      user = NormalizationBounds{j.at("bounds").at("lo").get<std::vector<double>>(),
                                 j.at("bounds").at("hi").get<std::vector<double>>()};
    const auto measure = parse_similarity(j.value("similarity", std::string("goodall4")));
    fx.problem = make_chebyshev_problem(space, std::move(ens), data,
                                        j.at("weights").get<std::vector<double>>(),
                                        j.value("kappa", kDefaultKappa),
                                        make_similarity(space, data, measure),
                                        observed_bounds(data, user));
    return fx;
  } catch (const json::exception& e) {
    throw Error(std::string("fixture: ") + e.what());
  }
}

// ---- run records ----------------------------------------------------------
//
// One JSON object per line. The first line is a header with the schema, the
// problem, the optimizer, the seed and the configuration; every further line
// is one evaluation. Point entries are feature values with categorical
// features as label indices. NaN is written as null.

inline json header_json(const RunRecord& r, const json& config) {
  return {{"schema", kRecordSchema},
          {"problem", r.problem},
          {"optimizer", r.optimizer},
          {"seed", r.seed},
          {"config", config}};
}

inline json to_json(const IterationRecord& it) {
  json j{{"i", it.index},       {"phase", it.phase},       {"x", it.point.values},
         {"y", it.y},           {"failed", it.failed},     {"feasible", it.feasible},
         {"violation", num(it.violation)}, {"hv", num(it.hypervolume)}};
  if (!it.weights.empty()) j["weights"] = it.weights;
  if (!it.solver_status.empty()) {
    j["solver"] = {{"status", it.solver_status},
                   {"gap", num(it.solver_gap)},
                   {"acquisition", num(it.acquisition)},
                   {"nodes", it.solver_nodes}};
  }
  return j;
}

inline IterationRecord iteration_from_json(const json& j) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  IterationRecord it;
  it.index = j.at("i").get<std::size_t>();
  it.phase = j.at("phase").get<std::string>();
  it.point = Point(j.at("x").get<std::vector<double>>());
  it.y = j.at("y").get<std::vector<double>>();
  it.failed = j.at("failed").get<bool>();
  it.feasible = j.at("feasible").get<bool>();
  it.violation = get_num(j, "violation", kInf);
  it.hypervolume = get_num(j, "hv", nan);
  if (j.contains("weights")) it.weights = j.at("weights").get<std::vector<double>>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    it.solver_status = s.at("status").get<std::string>();
    it.solver_gap = get_num(s, "gap", nan);
    it.acquisition = get_num(s, "acquisition", nan);
    it.solver_nodes = s.at("nodes").get<std::size_t>();
  }
  return it;
}

/// Appends a record line by line and flushes after each, so an interrupted
/// run keeps every completed iteration.
class RecordWriter {
 public:
  RecordWriter(const std::string& path, const RunRecord& header, const json& config)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot write '" + path + "'");
    write_line(header_json(header, config));
  }

  void append(const IterationRecord& it) { write_line(to_json(it)); }

 private:
  void write_line(const json& j) {
    out_ << j.dump() << '\n';
    out_.flush();
    if (!out_) throw Error("write failed for '" + path_ + "'");
  }

  std::string path_;
  std::ofstream out_;
};

struct LoadedRecord {
  RunRecord record;
  json config;
};

inline LoadedRecord read_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  LoadedRecord out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_text(line, path + ":" + std::to_string(lineno));
    try {
      if (lineno == 1) {
        check_schema(j, kRecordSchema);
        if (!j.contains("schema")) throw Error("missing schema field");
        out.record.problem = j.at("problem").get<std::string>();
        out.record.optimizer = j.at("optimizer").get<std::string>();
        out.record.seed = j.at("seed").get<std::uint64_t>();
        out.config = j.value("config", json::object());
      } else {
        out.record.iterations.push_back(iteration_from_json(j));
      }
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (lineno == 0) throw Error("'" + path + "' is empty");
  return out;
}

// ---- fronts ---------------------------------------------------------------

/// Tab-separated objective vectors after a "# treemoo.front/1" line.
inline void write_front(std::ostream& out, const Front& f) {
  out << "# " << kFrontSchema << '\n';
  out << std::setprecision(17);
  for (const auto& y : f) {
    for (std::size_t j = 0; j < y.size(); ++j) out << (j ? "\t" : "") << y[j];
    out << '\n';
  }
}

inline void write_front(const std::string& path, const Front& f) {
  std::ostringstream ss;
  write_front(ss, f);
  write_file(path, ss.str());
}

inline Front read_front(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  Front f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> y;
    double v;
    while (ls >> v) y.push_back(v);
    if (!ls.eof()) throw Error(path + ":" + std::to_string(lineno) + ": not a number");
    if (!f.empty() && y.size() != f.front().size())
      throw Error(path + ":" + std::to_string(lineno) + ": ragged row");
    f.push_back(std::move(y));
  }
  if (f.empty()) throw Error("'" + path + "' holds no points");
  return f;
}

}  // namespace treemoo::io
