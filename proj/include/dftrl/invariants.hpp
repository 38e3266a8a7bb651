#pragma once

#include <deque>

#include <Eigen/Core>

#include "dftrl/ftrl.hpp"
#include "dftrl/regularizer.hpp"

namespace dftrl {

/// Counters for the runtime checks a learner run is expected to satisfy.
/// Violations are counted, never thrown, so a run can report all of them.
struct InvariantReport {
  long norm_checks = 0;
  long norm_violations = 0;
  double worst_norm_ratio = 0.0;  // max ||est||_{R,w_tau} / budget

  long dikin_checks = 0;
  long dikin_violations = 0;
  double worst_dikin_distance = 0.0;  // max ||w_t - w_{t-delta}||*_{R,w_{t-delta}}

  long feasibility_checks = 0;
  long feasibility_violations = 0;

  void merge(const InvariantReport& other);
  bool clean() const { return norm_violations == 0 && dikin_violations == 0 && feasibility_violations == 0; }
};

/// Keeps the last d_max + 1 iterates so that each new iterate can be tested
/// against the Dikin ellipsoids of its predecessors.
class InvariantMonitor {
 public:
  InvariantMonitor(int d_max, double norm_budget, double dikin_radius = 0.5);

  /// Estimate budget 1 / (64 (1 + d_max)).
  static double default_norm_budget(int d_max);

  void record_iterate(const Regularizer& reg, const Eigen::VectorXd& w);
  void record_estimate(const LocalNormContext& ctx_at_emission, const Eigen::VectorXd& estimate);
  void record_feasibility(bool feasible);
  /// Drops the window (the regularizer changed).
  void reset_window() { window_.clear(); }

  const InvariantReport& report() const { return report_; }
  double norm_budget() const { return norm_budget_; }

 private:
  int d_max_;
  double norm_budget_;
  double dikin_radius_;
  std::deque<LocalNormContext> window_;
  InvariantReport report_;
};

}  // namespace dftrl
