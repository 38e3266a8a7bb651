#pragma once

#include <random>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dftrl/domain.hpp"
#include "dftrl/ftrl.hpp"
#include "dftrl/invariants.hpp"

namespace dftrl {

/// All binary vectors of length K with exactly B ones.
struct MSets {
  int dim = 0;
  int budget = 1;
};

/// Explicit binary action list, one action per column.
struct ExplicitVertices {
  Eigen::MatrixXd vertices;
};

class CombActionSet {
 public:
  using Variant = std::variant<MSets, ExplicitVertices>;

  CombActionSet(MSets m);
  CombActionSet(ExplicitVertices v);

  const Variant& variant() const { return variant_; }
  int dim() const;
  /// max_a |a|_1
  int budget() const;
  DomainSpec domain() const;

 private:
  Variant variant_;
};

struct SemiBanditParams {
  double eta = 0.0;
  double gamma = 0.0;
  int budget = 1;
  int dim = 1;
  int horizon = 1;
  long long total_missing = 0;
  int d_max = 1;
};

SemiBanditParams tune_semibandit(int budget, int dim, int horizon, long long total_missing, int d_max);

/// 12 sqrt(B (KT + BD) ln(K/B)) + 64^2 B (1+d)^2 K ln T + 2^9 B^2 d^2 ln(K/B)
double theorem_bound_comb(const SemiBanditParams& p);

struct WeightedAction {
  double prob = 0.0;
  Eigen::VectorXd action;
};

/// The full distribution used by sample_action: for MSets the outcomes of the
/// systematic sampler over its single uniform draw, for explicit vertices the
/// convex decomposition found by the simplex. Probabilities sum to 1 and the
/// mean equals w.
std::vector<WeightedAction> decomposition_support(const Eigen::VectorXd& w, const CombActionSet& actions);

/// Draws a in A with E[a] = w.
Eigen::VectorXd sample_action(const Eigen::VectorXd& w, const CombActionSet& actions, std::mt19937_64& rng);

/// Systematic sampling with one uniform draw u in [0, 1): coordinate i is
/// selected iff some u + j, j = 0..B-1, lies in [c_{i-1}, c_i) for the
/// cumulative sums c of w.
Eigen::VectorXd systematic_sample(const Eigen::VectorXd& w, int budget, double u);

/// est(i) = a(i) l(i) / w(i).
Eigen::VectorXd iw_estimate(const Eigen::VectorXd& action, const Eigen::VectorXd& observed, const Eigen::VectorXd& w);

/// Best fixed action for a cumulative loss; ties go to the lowest index.
Eigen::VectorXd best_in_hindsight_comb(const Eigen::VectorXd& cumulative_loss, const CombActionSet& actions);

/// Delayed FTRL over Conv(A) with the entropy plus log-barrier regularizer.
class SemiBanditLearner {
 public:
  SemiBanditLearner(CombActionSet actions, SemiBanditParams params, SolverOptions opts = {});

  /// Solves for w_t from the estimates received so far.
  const Iterate& prepare_round(int t);
  /// Samples a_t from the current iterate.
  Eigen::VectorXd play(std::mt19937_64& rng);
  /// Feedback a_tau * l_tau for an earlier round; returns the applied estimate.
  Eigen::VectorXd receive(int tau, const Eigen::VectorXd& observed);

  const Iterate& iterate() const { return ftrl_.current(); }
  const SemiBanditParams& params() const { return params_; }
  const CombActionSet& actions() const { return actions_; }
  const InvariantReport& invariants() const { return monitor_.report(); }

 private:
  struct Record {
    Eigen::VectorXd w;
    Eigen::VectorXd action;
  };

  CombActionSet actions_;
  SemiBanditParams params_;
  FtrlState ftrl_;
  InvariantMonitor monitor_;
  int round_ = 0;
  std::unordered_map<int, Record> pending_;
};

}  // namespace dftrl
