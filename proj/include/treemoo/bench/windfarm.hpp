#pragma once

// Offshore windfarm layout problem: up to 16 turbines in a square field with
// a Jensen/Katic top-hat wake model, energy production and efficiency as the
// two (maximized) objectives, and the minimum-spacing constraint set.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "treemoo/constraints.hpp"
#include "treemoo/error.hpp"
#include "treemoo/problem.hpp"

namespace treemoo::bench {

struct WindCase {
  double speed = 0.0;      // m/s
  double direction = 0.0;  // degrees, direction the wind blows toward
  double frequency = 0.0;
  bool operator==(const WindCase&) const = default;
};

/// Piecewise-linear power (kW) and thrust-coefficient curves; both are zero
/// outside the tabulated speed range.
struct TurbineCurve {
  std::vector<double> speed, power, thrust;

  bool operator==(const TurbineCurve&) const = default;

  [[nodiscard]] static double interp(const std::vector<double>& xs, const std::vector<double>& ys,
                                     double u) {
    if (xs.empty() || u < xs.front() || u > xs.back()) return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), u);
    if (it == xs.end()) return ys.back();
    const auto i = static_cast<std::size_t>(it - xs.begin());
    const double t = (u - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
  }
  [[nodiscard]] double power_at(double u) const { return interp(speed, power, u); }
  [[nodiscard]] double thrust_at(double u) const { return interp(speed, thrust, u); }

  void validate() const {
    if (speed.size() < 2 || power.size() != speed.size() || thrust.size() != speed.size())
      throw Error("turbine curve: need at least two rows of speed, power, thrust");
    for (std::size_t i = 1; i < speed.size(); ++i)
      if (!(speed[i] > speed[i - 1])) throw Error("turbine curve: speeds must increase");
    for (std::size_t i = 0; i < speed.size(); ++i) {
      if (power[i] < 0.0) throw Error("turbine curve: negative power");
      if (thrust[i] < 0.0 || thrust[i] >= 1.0) throw Error("turbine curve: thrust outside [0, 1)");
    }
  }
};

struct WindfarmModel {
  std::vector<WindCase> rose;
  TurbineCurve turbine;
  double rotor_radius = 82.0;
  double hub_height = 107.0;
  double roughness = 5e-4;
  double field = 3900.0;
  double min_distance = 975.0;
  std::size_t max_turbines = 16;

  /// Wake expansion coefficient 0.5 / ln(h_hub / z_0).
  [[nodiscard]] double xi() const { return 0.5 / std::log(hub_height / roughness); }

  void validate() const {
    turbine.validate();
    if (rose.empty()) throw Error("wind rose: no rows");
    double s = 0.0;
    for (const auto& w : rose) {
      if (w.frequency < 0.0 || !(w.speed >= 0.0)) throw Error("wind rose: negative entry");
      s += w.frequency;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error("wind rose: frequencies must sum to 1");
  }

  static WindfarmModel defaults();
};

namespace detail {

inline std::vector<std::vector<double>> read_table(std::istream& in, std::size_t cols,
                                                   const std::string& what) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.size() != cols || !ss.eof())
      throw Error(what + ": line " + std::to_string(lineno) + ": expected " +
                  std::to_string(cols) + " numbers");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Rescales frequencies to sum to 1; a table whose sum is off by more than
/// 1e-3 is rejected.
inline void normalize_rose(std::vector<WindCase>& rose) {
  double s = 0.0;
  for (const auto& w : rose) s += w.frequency;
  if (rose.empty() || std::abs(s - 1.0) > 1e-3) throw Error("wind rose: frequencies must sum to 1");
  for (auto& w : rose) w.frequency /= s;
}

/// Reads a rose table (speed, direction, frequency).
inline std::vector<WindCase> parse_wind_rose(std::istream& in) {
  std::vector<WindCase> rose;
  for (const auto& r : detail::read_table(in, 3, "wind rose")) rose.push_back({r[0], r[1], r[2]});
  normalize_rose(rose);
  return rose;
}

inline TurbineCurve parse_turbine_curve(std::istream& in) {
  TurbineCurve c;
  for (const auto& r : detail::read_table(in, 3, "turbine curve")) {
    c.speed.push_back(r[0]);
    c.power.push_back(r[1]);
    c.thrust.push_back(r[2]);
  }
  c.validate();
  return c;
}

inline WindfarmModel load_windfarm_model(const std::string& rose_path,
                                         const std::string& turbine_path) {
  WindfarmModel m;
  std::ifstream r(rose_path), t(turbine_path);
  if (!r) throw Error("cannot open wind rose file '" + rose_path + "'");
  if (!t) throw Error("cannot open turbine curve file '" + turbine_path + "'");
  m.rose = parse_wind_rose(r);
  m.turbine = parse_turbine_curve(t);
  m.validate();
  return m;
}

// Same numbers as data/windfarm/*.tsv.
inline WindfarmModel WindfarmModel::defaults() {
  static const double speed_freq[][2] = {
      {5, 0.022743}, {7, 0.025086},  {9, 0.023471},  {11, 0.019280}, {13, 0.014145},
      {15, 0.009357}, {17, 0.005616}, {19, 0.003070}, {21, 0.001532}, {23, 0.000700}};
  WindfarmModel m;
  for (int d = 0; d < 360; d += 45)
    for (const auto& sf : speed_freq) m.rose.push_back({sf[0], static_cast<double>(d), sf[1]});
  normalize_rose(m.rose);
  m.turbine.speed = {4, 5, 6, 7, 8, 9, 10, 11, 12, 12.5, 13, 14,
                     15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25};
  m.turbine.power = {0.0,    258.3,  643.7,  1181.5, 1897.2, 2816.1, 3963.7, 5365.4,
                     7046.6, 8000.0, 8000.0, 8000.0, 8000.0, 8000.0, 8000.0, 8000.0,
                     8000.0, 8000.0, 8000.0, 8000.0, 8000.0, 8000.0, 8000.0};
  m.turbine.thrust = {0.80, 0.80, 0.79, 0.78, 0.77, 0.75, 0.70, 0.62, 0.52, 0.47, 0.40, 0.32,
                      0.26, 0.21, 0.17, 0.14, 0.12, 0.10, 0.09, 0.08, 0.07, 0.06, 0.05};
  m.validate();
  return m;
}

struct Turbine {
  double x = 0.0, y = 0.0;
};

/// Area of the rotor disc (radius r) covered by a wake disc (radius rw) whose
/// center is c away.
inline double wake_overlap_area(double rw, double r, double c) {
  const double pi = std::numbers::pi;
  if (c >= rw + r) return 0.0;
  if (c <= std::abs(rw - r)) return pi * std::min(r, rw) * std::min(r, rw);
  const double a1 = std::acos(std::clamp((rw * rw + c * c - r * r) / (2.0 * rw * c), -1.0, 1.0));
  const double a2 = std::acos(std::clamp((r * r + c * c - rw * rw) / (2.0 * r * c), -1.0, 1.0));
  return 0.5 * rw * rw * (2.0 * a1 - std::sin(2.0 * a1)) +
         0.5 * r * r * (2.0 * a2 - std::sin(2.0 * a2));
}

/// Velocity deficit fraction caused on turbine j by turbine k for a wind of
/// the given speed blowing toward `direction` degrees.
inline double wake_interference(const WindfarmModel& m, const Turbine& k, const Turbine& j,
                                double speed, double direction) {
  const double th = direction * std::numbers::pi / 180.0;
  const double ux = std::cos(th), uy = std::sin(th);
  const double dx = j.x - k.x, dy = j.y - k.y;
  const double down = dx * ux + dy * uy;
  if (down <= 0.0) return 0.0;
  const double cross = std::abs(-dx * uy + dy * ux);
  const double r = m.rotor_radius;
  const double rw = r + m.xi() * down;
  const double area = wake_overlap_area(rw, r, cross);
  if (area <= 0.0) return 0.0;
  const double ct = m.turbine.thrust_at(speed);
  const double e = 1.0 + m.xi() * down / r;
  return (1.0 - std::sqrt(1.0 - ct)) / (e * e) * area / (std::numbers::pi * r * r);
}

struct WindfarmObjectives {
  double production = 0.0;  // f1
  double efficiency = 0.0;  // f2
};

/// Energy production relative to 16 ideal turbines and efficiency relative
/// to the active turbines without wakes.
inline WindfarmObjectives eval_windfarm(const std::vector<Turbine>& layout, const WindfarmModel& m) {
  if (layout.empty()) throw Error("windfarm: at least one active turbine is required");
  double actual = 0.0, ideal = 0.0;
  const std::size_t n = layout.size();
  for (const auto& w : m.rose) {
    double farm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j) continue;
        const double u = wake_interference(m, layout[k], layout[j], w.speed, w.direction);
        sq += u * u;
      }
      farm += sq == 0.0 ? m.turbine.power_at(w.speed)
                        : m.turbine.power_at(w.speed * (1.0 - std::sqrt(sq)));
    }
    actual += w.frequency * farm;
    ideal += w.frequency * m.turbine.power_at(w.speed);
  }
  if (!(ideal > 0.0)) throw Error("windfarm: wind rose yields no ideal power");
  WindfarmObjectives o;
  o.production = actual / (static_cast<double>(m.max_turbines) * ideal);
  o.efficiency = actual / (static_cast<double>(n) * ideal);
  return o;
}

/// Smallest pairwise distance between active turbines (inf for one turbine).
inline double min_spacing(const std::vector<Turbine>& layout) {
  double m = kInf;
  for (std::size_t a = 0; a < layout.size(); ++a)
    for (std::size_t b = a + 1; b < layout.size(); ++b)
      m = std::min(m, std::hypot(layout[a].x - layout[b].x, layout[a].y - layout[b].y));
  return m;
}

/// Variable layout of the design space: x1..x16, y1..y16, then b1..b16
/// (categorical with labels "0", "1").
inline DesignSpace windfarm_space(const WindfarmModel& m, bool helpers) {
  DesignSpace s;
  const std::size_t nt = m.max_turbines;
  for (std::size_t k = 0; k < nt; ++k)
    s.add_feature(FeatureSpec::continuous("x" + std::to_string(k + 1), 0.0, m.field));
  for (std::size_t k = 0; k < nt; ++k)
    s.add_feature(FeatureSpec::continuous("y" + std::to_string(k + 1), 0.0, m.field));
  for (std::size_t k = 0; k < nt; ++k)
    s.add_feature(FeatureSpec::categorical("b" + std::to_string(k + 1), {"0", "1"}));
  auto xr = [&](std::size_t k) { return VarRef::feature(k); };
  auto yr = [&](std::size_t k) { return VarRef::feature(nt + k); };
  auto br = [&](std::size_t k) { return VarRef::label_of(2 * nt + k, 1); };

  LinearConstraint any{"at_least_one_turbine", {}, Sense::Ge, 1.0};
  for (std::size_t k = 0; k < nt; ++k) any.terms.push_back({br(k), 1.0});
  s.add_constraint(any);

  const double diag = m.field * std::sqrt(2.0);
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t j = k + 1; j < nt; ++j) {
      const std::string tag = std::to_string(k + 1) + "_" + std::to_string(j + 1);
      const auto dx = VarRef::aux(s.add_aux(AuxVar::bounded("dx_" + tag, -m.field, m.field)));
      const auto dy = VarRef::aux(s.add_aux(AuxVar::bounded("dy_" + tag, -m.field, m.field)));
      const auto dist = VarRef::aux(s.add_aux(AuxVar::bounded("dist_" + tag, 0.0, diag)));
      const auto bd = VarRef::aux(s.add_aux(AuxVar::binary("bdist_" + tag)));
      s.add_constraint(LinearConstraint{"dx_" + tag, {{dx, 1.0}, {xr(k), -1.0}, {xr(j), 1.0}},
                                        Sense::Eq, 0.0});
      s.add_constraint(LinearConstraint{"dy_" + tag, {{dy, 1.0}, {yr(k), -1.0}, {yr(j), 1.0}},
                                        Sense::Eq, 0.0});
      s.add_constraint(QuadraticConstraint{
          "dist_" + tag, {{dist, dist, 1.0}, {dx, dx, -1.0}, {dy, dy, -1.0}}, {}, Sense::Le, 0.0,
          true});
      s.add_constraint(IndicatorConstraint{
          "spacing_" + tag, bd, true,
          LinearConstraint{"", {{dist, 1.0}}, Sense::Ge, m.min_distance}});
      s.add_constraint(BinaryProduct{"both_active_" + tag, bd, br(k), br(j)});
    }
  }
  if (helpers) {
    for (std::size_t k = 0; k + 1 < nt; ++k)
      s.add_constraint(LinearConstraint{"order_" + std::to_string(k + 1),
                                        {{br(k), 1.0}, {br(k + 1), -1.0}}, Sense::Ge, 0.0});
    for (std::size_t k = 0; k < nt; ++k) {
      const std::string t = std::to_string(k + 1);
      s.add_constraint(IndicatorConstraint{"park_x" + t, br(k), false,
                                           LinearConstraint{"", {{xr(k), 1.0}}, Sense::Le, 0.0}});
      s.add_constraint(IndicatorConstraint{"park_y" + t, br(k), false,
                                           LinearConstraint{"", {{yr(k), 1.0}}, Sense::Le, 0.0}});
    }
  }
  s.validate();
  return s;
}

class WindfarmProblem : public Problem {
 public:
  explicit WindfarmProblem(WindfarmModel model = WindfarmModel::defaults())
      : model_(std::move(model)),
        space_(windfarm_space(model_, true)),
        required_(windfarm_space(model_, false)) {
    model_.validate();
  }

  [[nodiscard]] std::string name() const override { return "windfarm"; }
  [[nodiscard]] const WindfarmModel& model() const { return model_; }
  [[nodiscard]] const DesignSpace& space() const override { return space_; }
  [[nodiscard]] const DesignSpace& required_space() const override { return required_; }

  [[nodiscard]] std::vector<Turbine> layout(const Point& p) const {
    const std::size_t nt = model_.max_turbines;
    std::vector<Turbine> out;
    for (std::size_t k = 0; k < nt; ++k)
      if (p.label(2 * nt + k) == 1) out.push_back({p.values[k], p.values[nt + k]});
    return out;
  }

  [[nodiscard]] std::vector<double> evaluate(const Point& p) const override {
    if (!space_.in_bounds(p)) throw Error("windfarm: point outside the field");
    const auto o = eval_windfarm(layout(p), model_);
    return {-o.production, -o.efficiency};
  }
  [[nodiscard]] std::vector<double> report_signs() const override { return {-1.0, -1.0}; }
  [[nodiscard]] std::vector<double> reference_point() const override { return {0.0, 0.0}; }
  [[nodiscard]] std::size_t default_initial() const override { return model_.max_turbines; }

  /// Sample i fixes the number of active turbines to (i mod 16) + 1; the
  /// very first sample also places turbine 1 at (c + e, c + e), c = field/2,
  /// e ~ U(0, field/2).
  [[nodiscard]] Pin sample_pin(std::size_t index, Rng& rng) const override {
    const std::size_t nt = model_.max_turbines;
    Pin pin;
    LinearConstraint count{"pin_turbine_count", {}, Sense::Eq,
                           static_cast<double>(index % nt + 1)};
    for (std::size_t k = 0; k < nt; ++k) count.terms.push_back({VarRef::label_of(2 * nt + k, 1), 1.0});
    pin.constraints.push_back(count);
    if (index == 0) {
      const double half = 0.5 * model_.field;
      const double pos = half + rng.uniform(0.0, half);
      pin.constraints.push_back(
          LinearConstraint{"pin_x1", {{VarRef::feature(0), 1.0}}, Sense::Eq, pos});
      pin.constraints.push_back(
          LinearConstraint{"pin_y1", {{VarRef::feature(nt), 1.0}}, Sense::Eq, pos});
    }
    return pin;
  }

 private:
  WindfarmModel model_;
  DesignSpace space_;
  DesignSpace required_;
};

}  // namespace treemoo::bench
