#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "dftrl/domain.hpp"
#include "dftrl/ftrl.hpp"
#include "dftrl/invariants.hpp"

namespace dftrl {

// Tensors over (h, s, a) use OccupancyLayout::loss_index; tensors over
// (h, s, a, s') use OccupancyLayout::full_index ("dense") or packed_index
// ("packed", the solver coordinates). Policies are (h, s, a) tensors whose
// (h, s, .) slices sum to 1.

struct MdpSpec {
  int states = 1;
  int actions = 1;
  int horizon = 1;
  int initial_state = 0;
  int episodes = 1;
  Eigen::VectorXd transitions;  // dense, p_h(s' | s, a)

  OccupancyLayout layout() const { return OccupancyLayout(horizon, states, actions, initial_state); }
  /// Throws RejectedInput unless every transition row is a distribution.
  void validate() const;
};

/// Transition rows drawn from a flat Dirichlet with a seeded generator.
MdpSpec random_mdp(int states, int actions, int horizon, int episodes, std::uint64_t seed);

/// 1 / (T H S A)
double confidence_radius(const MdpSpec& spec);
/// 1 / (T^3 H^2 S^4 A^2)
double occupancy_floor(const MdpSpec& spec);

/// Dense occupancy measure of a policy under the given transitions.
Eigen::VectorXd occupancy_from_policy(const MdpSpec& spec, const Eigen::VectorXd& policy,
                                      const Eigen::VectorXd& transitions);
Eigen::VectorXd occupancy_from_policy(const MdpSpec& spec, const Eigen::VectorXd& policy);

/// w_h(s, a) = sum_{s'} w_h(s, a, s') from a dense tensor.
Eigen::VectorXd state_action_marginal(const OccupancyLayout& layout, const Eigen::VectorXd& dense);

/// pi_h(a | s) = w_h(s, a) / w_h(s). Layer-1 states other than s_init carry no
/// mass by construction and get the uniform policy.
Eigen::VectorXd policy_from_occupancy(const OccupancyLayout& layout, const Eigen::VectorXd& dense);

/// w_h(s, a, s') / w_h(s, a) on entries with positive mass (zero elsewhere).
Eigen::VectorXd induced_transitions(const OccupancyLayout& layout, const Eigen::VectorXd& dense);

OccupancyPolytope build_mdp_domain(const MdpSpec& spec);

/// (1 - weight) w^pi + weight w^{uniform, smoothed p}: the point of the
/// domain used to shift a comparator inside it.
Eigen::VectorXd shifted_occupancy(const MdpSpec& spec, const Eigen::VectorXd& policy, double weight);

/// u_h(s, a) = max over transitions within eps of p (entrywise) of the
/// occupancy of (h, s, a). One backward dynamic program per target (h, s);
/// the inner maximization over the band intersected with the simplex is a
/// fractional knapsack.
Eigen::VectorXd upper_occupancy(const MdpSpec& spec, const Eigen::VectorXd& policy, double eps);

struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> losses;
};

Trajectory rollout(const MdpSpec& spec, const Eigen::VectorXd& policy, const Eigen::VectorXd& loss,
                   std::mt19937_64& rng);

/// est_h(s, a) = 1{(s_h, a_h) = (s, a)} l_h(s, a) / u_h(s, a).
Eigen::VectorXd mdp_estimate(const OccupancyLayout& layout, const Trajectory& traj, const Eigen::VectorXd& upper);

/// Copies an (h, s, a) tensor onto every successor s' in packed coordinates.
Eigen::VectorXd expand_loss(const OccupancyLayout& layout, const Eigen::VectorXd& loss);

struct MdpParams {
  double eta = 0.0;
  double gamma = 0.0;
  int states = 1;
  int actions = 1;
  int horizon = 1;
  int episodes = 1;
  long long total_missing = 0;
  int d_max = 1;
};

MdpParams tune_mdp(int horizon, int states, int actions, int episodes, long long total_missing, int d_max);

/// 10 H sqrt(SAT log(HSAT)) + 10 H sqrt(D log(HSAT)) + 7e5 H^2 S^2 A (1 + d)^2
double theorem_bound_mdp(const MdpParams& p);

struct MdpComparator {
  Eigen::VectorXd policy;  // deterministic
  double value = 0.0;
};

/// Backward induction on the summed cost tensor; ties go to the lowest action.
MdpComparator best_in_hindsight_mdp(const MdpSpec& spec, const Eigen::VectorXd& cumulative_loss);

/// Value of a policy from s_init under the true transitions.
double policy_value(const MdpSpec& spec, const Eigen::VectorXd& policy, const Eigen::VectorXd& loss);

/// Per-round checks specific to the occupancy setting.
struct MdpDiagnostics {
  long rounds = 0;
  double worst_equality = 0.0;     // flow and mass violation of iterates
  double worst_slack = 0.0;        // most negative floor/band slack of iterates (0 when all strict)
  long upper_violations = 0;       // u below max(w_t, w^{pi_t}) on some entry
  double worst_upper_gap = 0.0;    // |u - w|_1 / (4 H^2 S / T)
  double worst_policy_gap = 0.0;   // |w^{pi} - w|_1 / (2H / T)
  double worst_loss_norm_ratio = 0.0;  // |l_t|_{R,w_t} / (1 / (16 (1 + d)))
};

class MdpLearner {
 public:
  MdpLearner(MdpSpec spec, MdpParams params, SolverOptions opts = {});

  /// Solves for w_t and returns pi_t.
  const Eigen::VectorXd& prepare_round(int t);
  /// Registers the episode played with the current policy.
  void played(const Eigen::VectorXd& true_loss_for_diagnostics);
  /// Trajectory feedback of an earlier episode; returns the applied estimate.
  Eigen::VectorXd receive(int tau, const Trajectory& traj);

  const Iterate& iterate() const { return ftrl_.current(); }
  const Eigen::VectorXd& policy() const { return policy_; }
  const MdpSpec& spec() const { return spec_; }
  const MdpParams& params() const { return params_; }
  const InvariantReport& invariants() const { return monitor_.report(); }
  const MdpDiagnostics& diagnostics() const { return diag_; }

 private:
  struct Record {
    Eigen::VectorXd w;  // packed
    Eigen::VectorXd upper;
  };

  MdpSpec spec_;
  OccupancyLayout layout_;
  MdpParams params_;
  OccupancyPolytope domain_;
  FtrlState ftrl_;
  InvariantMonitor monitor_;
  MdpDiagnostics diag_;
  Eigen::VectorXd policy_;
  int round_ = 0;
  std::unordered_map<int, Record> pending_;
};

}  // namespace dftrl
