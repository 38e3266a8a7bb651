#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace dftrl {

/// Indexing for occupancy tensors w_h(s, a, s'). The dense tensor has
/// H * S * A * S entries. Layer 1 is pinned to the initial state, so the packed
/// coordinate vector used by the solver keeps only (s_init, a, s') there.
class OccupancyLayout {
 public:
  OccupancyLayout() = default;
  OccupancyLayout(int horizon, int states, int actions, int initial_state);

  int horizon() const { return h_; }
  int states() const { return s_; }
  int actions() const { return a_; }
  int initial_state() const { return s_init_; }

  int full_size() const { return h_ * s_ * a_ * s_; }
  int packed_size() const { return a_ * s_ + (h_ - 1) * s_ * a_ * s_; }

  int full_index(int h, int s, int a, int next) const { return ((h * s_ + s) * a_ + a) * s_ + next; }
  /// -1 when (h, s, a, next) is structurally zero (layer 1, s != s_init).
  int packed_index(int h, int s, int a, int next) const;

  Eigen::VectorXd pack(const Eigen::VectorXd& full) const;
  Eigen::VectorXd unpack(const Eigen::VectorXd& packed) const;

  /// Index of (h, s, a) in a flattened H * S * A loss tensor.
  int loss_index(int h, int s, int a) const { return (h * s_ + s) * a_ + a; }
  int loss_size() const { return h_ * s_ * a_; }

 private:
  int h_ = 0;
  int s_ = 0;
  int a_ = 0;
  int s_init_ = 0;
};

/// {w in [0,1]^K : sum_i w(i) = B}. Equals Conv of the B-subsets of [K].
struct CappedSimplexHull {
  int dim = 0;
  double budget = 1.0;
};

/// Convex hull of an explicit set of binary vertices (one per column).
struct VertexHull {
  Eigen::MatrixXd vertices;
};

/// Augmented occupancy set intersected with a coordinate floor: flow
/// conservation, unit initial mass at s_init, per-entry transition ratios
/// within `confidence_radius` of the true transitions, entries >= `floor`.
struct OccupancyPolytope {
  OccupancyLayout layout;
  Eigen::VectorXd transitions;  // dense H*S*A*S, p_h(s'|s,a) at full_index
  double confidence_radius = 0.0;
  double floor = 0.0;
  int episodes = 1;  // T; sets the weight of the smoothed witness
};

/// A strictly feasible point of the occupancy polytope (dense tensor): the
/// uniform policy's occupancy under p mixed with its occupancy under the
/// smoothed transitions (1 - eps) p + eps / S. The mixture weight starts at
/// 1/T and is raised only if the floor is not met strictly.
Eigen::VectorXd occupancy_witness(const OccupancyPolytope& dom);

/// Forward occupancy recursion for a dense policy tensor pi[(h*S + s)*A + a]
/// and dense transitions. Returns the dense H*S*A*S tensor.
Eigen::VectorXd occupancy_forward(const OccupancyLayout& layout, const Eigen::VectorXd& policy,
                                  const Eigen::VectorXd& transitions);

struct Ball {
  int dim = 0;
  double radius = 1.0;
};

/// {w : A w <= b}, assumed bounded with nonempty interior.
struct Polytope {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

/// Linear-algebra view of a domain for the Newton solver. Solver variables x
/// map to decision points by w = lift * x (identity when lift is empty).
/// Equalities are enforced exactly; the rows of `ineq_g x <= ineq_h` are kept
/// interior by a small logarithmic penalty.
struct Formulation {
  int solver_dim = 0;
  std::optional<Eigen::MatrixXd> lift;
  Eigen::MatrixXd eq_a;
  Eigen::VectorXd eq_b;
  Eigen::MatrixXd ineq_g;
  Eigen::VectorXd ineq_h;
  Eigen::VectorXd start;  // strictly feasible
  bool single_point = false;

  Eigen::VectorXd to_decision(const Eigen::VectorXd& x) const { return lift ? Eigen::VectorXd(*lift * x) : x; }
};

/// Distance of a decision point from the domain's constraint set.
struct FeasibilityReport {
  double equality_violation = 0.0;  // max |A w - b|
  double min_slack = 0.0;           // smallest inequality slack (negative = violated)
};

class DomainSpec {
 public:
  using Variant = std::variant<CappedSimplexHull, VertexHull, OccupancyPolytope, Ball, Polytope>;

  DomainSpec(CappedSimplexHull d);
  DomainSpec(VertexHull d);
  DomainSpec(OccupancyPolytope d);
  DomainSpec(Ball d);
  DomainSpec(Polytope d);

  const Variant& variant() const { return variant_; }
  int dim() const;

  Formulation formulate() const;
  FeasibilityReport check(const Eigen::VectorXd& w) const;

 private:
  Variant variant_;
};

}  // namespace dftrl
