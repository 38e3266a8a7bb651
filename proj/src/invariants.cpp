#include "dftrl/invariants.hpp"

#include <algorithm>

#include "dftrl/errors.hpp"

namespace dftrl {

void InvariantReport::merge(const InvariantReport& o) {
  norm_checks += o.norm_checks;
  norm_violations += o.norm_violations;
  worst_norm_ratio = std::max(worst_norm_ratio, o.worst_norm_ratio);
  dikin_checks += o.dikin_checks;
  dikin_violations += o.dikin_violations;
  worst_dikin_distance = std::max(worst_dikin_distance, o.worst_dikin_distance);
  feasibility_checks += o.feasibility_checks;
  feasibility_violations += o.feasibility_violations;
}

InvariantMonitor::InvariantMonitor(int d_max, double norm_budget, double dikin_radius)
    : d_max_(std::max(1, d_max)), norm_budget_(norm_budget), dikin_radius_(dikin_radius) {
  if (!(norm_budget > 0.0) || !(dikin_radius > 0.0)) throw RejectedInput("invariant monitor: budgets must be positive");
}

double InvariantMonitor::default_norm_budget(int d_max) { return 1.0 / (64.0 * (1.0 + std::max(1, d_max))); }

void InvariantMonitor::record_iterate(const Regularizer& reg, const Eigen::VectorXd& w) {
  for (const auto& ctx : window_) {
    const double dist = ctx.local_norm_dual(w - ctx.center());
    ++report_.dikin_checks;
    report_.worst_dikin_distance = std::max(report_.worst_dikin_distance, dist);
    if (dist > dikin_radius_) ++report_.dikin_violations;
  }
  window_.emplace_back(reg, w);
  while (static_cast<int>(window_.size()) > d_max_ + 1) window_.pop_front();
}

void InvariantMonitor::record_estimate(const LocalNormContext& ctx, const Eigen::VectorXd& estimate) {
  const double ratio = ctx.local_norm(estimate) / norm_budget_;
  ++report_.norm_checks;
  report_.worst_norm_ratio = std::max(report_.worst_norm_ratio, ratio);
  if (ratio > 1.0) ++report_.norm_violations;
}

void InvariantMonitor::record_feasibility(bool feasible) {
  ++report_.feasibility_checks;
  if (!feasible) ++report_.feasibility_violations;
}

}  // namespace dftrl
