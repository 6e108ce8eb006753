#pragma once

// Per-run history shared by the optimizer and the baselines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "treemoo/constraints.hpp"
#include "treemoo/dataset.hpp"
#include "treemoo/design_space.hpp"
#include "treemoo/pareto.hpp"
#include "treemoo/problem.hpp"

namespace treemoo {

struct IterationRecord {
  std::size_t index = 0;
  std::string phase;  // "initial", "proposal", "sample", "offspring"
  Point point;
  std::vector<double> y;    // minimized values used by the optimizer
  bool failed = false;      // evaluation failed; y holds the worst observed values
  bool feasible = true;     // w.r.t. the problem's required constraints
  double violation = 0.0;   // total scaled violation of the required constraints
  std::vector<double> weights;
  std::string solver_status;
  double solver_gap = std::numeric_limits<double>::quiet_NaN();
  double acquisition = std::numeric_limits<double>::quiet_NaN();
  std::size_t solver_nodes = 0;
  double hypervolume = std::numeric_limits<double>::quiet_NaN();
};

struct RunRecord {
  std::string problem;
  std::string optimizer;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
};

/// Tracks the non-dominated feasible observations and the hypervolume curve.
class RunTracker {
 public:
  RunTracker(std::vector<double> reference, std::size_t num_objectives)
      : ref_(std::move(reference)), nf_(num_objectives) {}

  void observe(IterationRecord& it) {
    if (it.feasible && !it.failed) archive_.insert(it.point, it.y);
    it.hypervolume = nf_ == 2 ? hypervolume() : std::numeric_limits<double>::quiet_NaN();
  }

  [[nodiscard]] double hypervolume() const {
    return archive_.hypervolume(ref_);
  }
  [[nodiscard]] const ParetoArchive& archive() const { return archive_; }

 private:
  std::vector<double> ref_;
  std::size_t nf_;
  ParetoArchive archive_;
};

struct RunOutput {
  RunRecord record;
  ParetoArchive archive;
};

/// Called after each iteration is recorded, e.g. to append it to a file.
using IterationSink = std::function<void(const IterationRecord&)>;

/// Evaluates points in order and keeps the dataset, the record and the
/// archive in step. A failed evaluation stores the worst observed value per
/// objective so the dataset stays complete.
class RunSession {
 public:
  RunSession(const Problem& problem, std::string optimizer, std::uint64_t seed,
             IterationSink sink = {})
      : problem_(problem),
        sink_(std::move(sink)),
        tracker_(problem.reference_point(), problem.num_objectives()) {
    out_.record.problem = problem.name();
    out_.record.optimizer = std::move(optimizer);
    out_.record.seed = seed;
  }

  const IterationRecord& commit(IterationRecord it) {
    it.index = out_.record.iterations.size();
    try {
      it.y = problem_.evaluate(it.point);
      it.failed = false;
    } catch (const Error&) {
      if (data_.empty()) throw Error("the first evaluation failed; no values to substitute");
      it.failed = true;
      it.y.assign(data_.num_objectives(), -kInf);
      for (const auto& row : data_.targets)
        for (std::size_t j = 0; j < row.size(); ++j) it.y[j] = std::max(it.y[j], row[j]);
    }
    const auto rep = evaluate_feasibility(problem_.required_space(), it.point);
    it.feasible = rep.feasible();
    it.violation = rep.total_violation;
    data_.add(it.point, it.y);
    tracker_.observe(it);
    out_.record.iterations.push_back(std::move(it));
    if (sink_) sink_(out_.record.iterations.back());
    return out_.record.iterations.back();
  }

  [[nodiscard]] const DataSet& data() const { return data_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  RunOutput finish() {
    out_.archive = tracker_.archive();
    return std::move(out_);
  }

 private:
  const Problem& problem_;
  IterationSink sink_;
  RunTracker tracker_;
  DataSet data_;
  RunOutput out_;
};

inline std::size_t count_infeasible(const RunRecord& r) {
  std::size_t n = 0;
  for (const auto& it : r.iterations) n += it.feasible ? 0 : 1;
  return n;
}

}  // namespace treemoo
