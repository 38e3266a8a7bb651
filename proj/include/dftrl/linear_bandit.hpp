#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>

#include <Eigen/Core>

#include "dftrl/barrier.hpp"
#include "dftrl/domain.hpp"
#include "dftrl/ftrl.hpp"
#include "dftrl/invariants.hpp"

namespace dftrl {

/// Self-concordant barrier for a Ball or Polytope domain.
BarrierSpec barrier_for(const DomainSpec& dom);

/// Radius B of the smallest origin-centred ball containing the domain.
double domain_radius(const DomainSpec& dom);

struct LinearParams {
  double eta = 0.0;
  double gamma = 0.0;
  double radius = 1.0;  // B
  int dim = 1;          // K
  int horizon = 1;
  long long total_missing = 0;
  int d_max = 1;
  double nu = 1.0;
};

LinearParams tune_linban(double radius, int dim, int horizon, long long total_missing, int d_max, double nu);

/// 14 B K sqrt(nu T ln T) + 8 B sqrt(D) + 2^14 nu B^2 K^2 (1 + d)^2 ln T
double theorem_bound_lin(const LinearParams& p);

/// Uniform direction on the unit sphere (normalized standard normals).
Eigen::VectorXd sphere_draw(int dim, std::mt19937_64& rng);

struct LinearAction {
  Eigen::VectorXd a;
  Eigen::VectorXd v;
};

/// a = w + H^{-1/2} v with H the Hessian of R at w.
LinearAction sample_linban_action(const Eigen::VectorXd& w, const Regularizer& reg, std::mt19937_64& rng);
/// Same, but throws InvariantViolation when a falls outside the domain.
LinearAction sample_linban_action(const Eigen::VectorXd& w, const Regularizer& reg, const DomainSpec& dom,
                                  std::mt19937_64& rng);

/// est = K (l^T a) H^{1/2} v.
Eigen::VectorXd lin_estimate(double feedback, const Eigen::VectorXd& v, const Regularizer& reg,
                             const Eigen::VectorXd& w);

/// Minimizer of L^T u over the domain (any point when L = 0).
Eigen::VectorXd best_in_hindsight_lin(const Eigen::VectorXd& cumulative_loss, const DomainSpec& dom);

/// w_1 + (u - w_1) / (1 + delta): the comparator pulled into the shrunk domain.
Eigen::VectorXd shifted_comparator(const Eigen::VectorXd& u, const Eigen::VectorXd& w1, double delta);

struct EstimatorMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  long draws = 0;
};

/// Monte Carlo mean of the estimator at a frozen w for a fixed loss. Draws
/// are split into fixed chunks, each with its own generator keyed by
/// (seed, chunk), and partial sums are combined in chunk order, so the serial
/// and parallel versions return identical numbers.
EstimatorMoments estimator_moments_serial(const Eigen::VectorXd& loss, const Eigen::VectorXd& w,
                                          const Regularizer& reg, long draws, std::uint64_t seed);
EstimatorMoments estimator_moments_parallel(const Eigen::VectorXd& loss, const Eigen::VectorXd& w,
                                            const Regularizer& reg, long draws, std::uint64_t seed);

class LinearLearner {
 public:
  LinearLearner(DomainSpec dom, LinearParams params, SolverOptions opts = {});

  const Iterate& prepare_round(int t);
  /// Samples a_t; infeasible actions are counted in invariants().
  Eigen::VectorXd play(std::mt19937_64& rng);
  /// Scalar feedback l_tau^T a_tau of an earlier round; returns the estimate.
  Eigen::VectorXd receive(int tau, double feedback);

  const Iterate& iterate() const { return ftrl_.current(); }
  const LinearParams& params() const { return params_; }
  const DomainSpec& domain() const { return ftrl_.problem().domain(); }
  const Regularizer& regularizer() const { return ftrl_.regularizer(); }
  const InvariantReport& invariants() const { return monitor_.report(); }
  /// max over received rounds of | |est|_{R,w} - K |l^T a| |.
  double worst_identity_gap() const { return worst_identity_gap_; }

 private:
  struct Record {
    Eigen::VectorXd w;
    Eigen::VectorXd v;
  };

  LinearParams params_;
  FtrlState ftrl_;
  InvariantMonitor monitor_;
  int round_ = 0;
  std::unordered_map<int, Record> pending_;
  double worst_identity_gap_ = 0.0;
};

}  // namespace dftrl
