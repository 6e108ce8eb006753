#pragma once

// Black-box problem interface shared by the optimizer, the baselines and the
// experiment runner. Objective values are always minimized; problems that
// maximize report their values with the signs from report_signs().

#include <optional>
#include <string>
#include <vector>

#include "treemoo/acquisition.hpp"
#include "treemoo/design_space.hpp"
#include "treemoo/rng.hpp"

namespace treemoo {

/// Extra restrictions applied to one point of the max-min sampler, e.g. a
/// fixed number of active turbines.
struct Pin {
  std::vector<Constraint> constraints;
};

enum class InitialDesign { Uniform, MaxMin };

class Problem {
 public:
  virtual ~Problem() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  /// Space seen by the model-based optimizer and the sampler; may carry
  /// symmetry-breaking helper constraints on top of the required ones.
  [[nodiscard]] virtual const DesignSpace& space() const = 0;
  /// Required constraints only (what the evolutionary baseline sees).
  [[nodiscard]] virtual const DesignSpace& required_space() const { return space(); }
  [[nodiscard]] virtual std::size_t num_objectives() const { return 2; }
  /// Minimized objective values. Throws Error when the evaluation fails.
  [[nodiscard]] virtual std::vector<double> evaluate(const Point& p) const = 0;
  [[nodiscard]] virtual std::vector<double> report_signs() const {
    return std::vector<double>(num_objectives(), 1.0);
  }
  /// Hypervolume reference point in minimized units.
  [[nodiscard]] virtual std::vector<double> reference_point() const = 0;
  [[nodiscard]] virtual std::optional<NormalizationBounds> objective_bounds() const {
    return std::nullopt;
  }
  [[nodiscard]] virtual InitialDesign initial_design() const { return InitialDesign::MaxMin; }
  /// Pin for sample `index` of the max-min sequence; may draw from rng.
  [[nodiscard]] virtual Pin sample_pin(std::size_t /*index*/, Rng& /*rng*/) const { return {}; }
  [[nodiscard]] virtual bool has_true_front() const { return false; }
  /// Default number of initial points.
  [[nodiscard]] virtual std::size_t default_initial() const { return 10; }
};

}  // namespace treemoo
