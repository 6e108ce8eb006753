#pragma once

// Battery material selection design space: one categorical parameter set,
// nine continuous design variables, binder-fraction limits and per-set
// C-rate caps. The objective is a smooth stand-in (no cell simulation); the
// problem exists to exercise label-guarded constraints and categorical
// proposals.

#include <cmath>
#include <string>
#include <vector>

#include "treemoo/error.hpp"
#include "treemoo/problem.hpp"

namespace treemoo::bench {

inline DesignSpace battery_space() {
  DesignSpace s;
  const std::vector<std::string> sets{"Ai2019", "Chen2020", "Ecker2015", "Marquis2019", "Yang2017"};
  const auto p = s.add_feature(FeatureSpec::categorical("p", sets));
  const auto c = s.add_feature(FeatureSpec::continuous("C", 0.5, 8.2));
  const auto pn = s.add_feature(FeatureSpec::continuous("eps_poros_neg", 0.2, 0.7));
  const auto an = s.add_feature(FeatureSpec::continuous("eps_active_neg", 0.2, 0.7));
  s.add_feature(FeatureSpec::continuous("r_particle_neg", 1e-6, 20e-6));
  const auto pp = s.add_feature(FeatureSpec::continuous("eps_poros_pos", 0.2, 0.7));
  const auto ap = s.add_feature(FeatureSpec::continuous("eps_active_pos", 0.2, 0.7));
  s.add_feature(FeatureSpec::continuous("r_particle_pos", 1e-6, 20e-6));
  s.add_feature(FeatureSpec::continuous("lambda_neg", 0.5, 2.0));
  s.add_feature(FeatureSpec::continuous("lambda_pos", 0.5, 2.0));

  s.add_constraint(LinearConstraint{
      "binder_neg", {{VarRef::feature(pn), 1.0}, {VarRef::feature(an), 1.0}}, Sense::Le, 0.95});
  s.add_constraint(LinearConstraint{
      "binder_pos", {{VarRef::feature(pp), 1.0}, {VarRef::feature(ap), 1.0}}, Sense::Le, 0.95});
  const double caps[] = {3.2, 2.2, 8.2, 5.2, 8.2};
  for (std::size_t j = 0; j < sets.size(); ++j)
    s.add_constraint(IndicatorConstraint{
        "c_rate_" + sets[j], VarRef::label_of(p, j), true,
        LinearConstraint{"", {{VarRef::feature(c), 1.0}}, Sense::Le, caps[j]}});
  s.validate();
  return s;
}

class BatteryProblem : public Problem {
 public:
  BatteryProblem() : space_(battery_space()) {}

  [[nodiscard]] std::string name() const override { return "battery"; }
  [[nodiscard]] const DesignSpace& space() const override { return space_; }

  // Mean power rises with C-rate and active fraction and falls with
  // thickness; energy falls with C-rate. Both are maximized, so negated.
  [[nodiscard]] std::vector<double> evaluate(const Point& x) const override {
    if (!space_.in_bounds(x)) throw Error("battery: point outside the bounds");
    static const double set_scale[] = {1.00, 1.10, 0.90, 0.95, 1.05};
    const auto& v = x.values;
    const double k = set_scale[x.label(0)];
    const double c = v[1];
    const double active = 0.5 * (v[3] + v[6]);
    const double poros = 0.5 * (v[2] + v[5]);
    const double r = 0.5 * (v[4] + v[7]) * 1e6;
    const double lam = 0.5 * (v[8] + v[9]);
    const double loss = 0.02 * c * lam * lam * (1.0 + 0.05 * r) / (0.1 + poros);
    const double energy = k * active * lam * std::exp(-loss);
    const double power = energy * c / (1.0 + 0.1 * c * lam);
    return {-power, -energy};
  }
  [[nodiscard]] std::vector<double> report_signs() const override { return {-1.0, -1.0}; }
  [[nodiscard]] std::vector<double> reference_point() const override { return {0.0, 0.0}; }

  /// Two consecutive samples per parameter set.
  [[nodiscard]] Pin sample_pin(std::size_t index, Rng& /*rng*/) const override {
    const std::size_t label = (index / 2) % space_[0].num_labels();
    return {{LinearConstraint{"pin_p", {{VarRef::label_of(0, label), 1.0}}, Sense::Eq, 1.0}}};
  }

 private:
  DesignSpace space_;
};

}  // namespace treemoo::bench
