#pragma once

#include <optional>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "dftrl/domain.hpp"
#include "dftrl/regularizer.hpp"

namespace dftrl {

/// A solution of min_w L^T w + R(w) over a domain, with its certificate.
struct Iterate {
  Eigen::VectorXd w;  // decision point
  Eigen::VectorXd x;  // solver variables (differs from w only for lifted domains)
  double kkt_residual = 0.0;
  double feasibility_slack = 0.0;
  int newton_steps = 0;
};

struct SolverOptions {
  double tol = 1e-9;
  int max_steps = 200;
  double armijo = 0.25;
  double shrink = 0.5;
  // Final weight of the log penalty on explicit inequality rows, relative to
  // the regularizer gradient scale at the domain's start point.
  double penalty = 1e-8;
  double initial_penalty = 1.0;  // cold starts begin here and shrink toward `penalty`
  double penalty_decrease = 0.1;
};

/// The FTRL argmin for a fixed regularizer and domain. Formulation and
/// equality factorizations are built once and reused across rounds.
class FtrlProblem {
 public:
  FtrlProblem(Regularizer reg, DomainSpec dom, SolverOptions opts = {});

  /// Damped Newton from `warm` (or the domain's interior start). Throws
  /// ConvergenceError when the step budget runs out.
  Iterate solve(const Eigen::VectorXd& loss, const Iterate* warm = nullptr) const;

  const Regularizer& regularizer() const { return reg_; }
  const DomainSpec& domain() const { return dom_; }
  const Formulation& formulation() const { return form_; }
  const SolverOptions& options() const { return opts_; }

 private:
  struct Eval;

  bool strictly_feasible(const Eigen::VectorXd& x) const;
  double objective(const Eigen::VectorXd& loss, const Eigen::VectorXd& x, double mu) const;
  Eval evaluate(const Eigen::VectorXd& loss, const Eigen::VectorXd& x, double mu) const;
  Eigen::VectorXd project_null(const Eigen::VectorXd& g) const;
  double equality_violation(const Eigen::VectorXd& x) const;
  Iterate finish(const Eigen::VectorXd& x, double residual, int steps) const;

  Regularizer reg_;
  DomainSpec dom_;
  SolverOptions opts_;
  Formulation form_;
  Eigen::LDLT<Eigen::MatrixXd> eq_gram_;  // factor of A A^T
  double final_penalty_ = 0.0;
};

/// Cumulative estimated loss plus the warm-started iterate sequence it drives.
class FtrlState {
 public:
  FtrlState(Regularizer reg, DomainSpec dom, SolverOptions opts = {});

  void add_estimate(const Eigen::VectorXd& estimate);
  /// Recomputes the iterate for the current cumulative estimate.
  const Iterate& update();

  const Iterate& current() const;
  bool has_iterate() const { return has_iterate_; }
  const Eigen::VectorXd& cumulative() const { return cumulative_; }
  const FtrlProblem& problem() const { return problem_; }
  const Regularizer& regularizer() const { return problem_.regularizer(); }

 private:
  FtrlProblem problem_;
  Eigen::VectorXd cumulative_;
  Iterate iterate_;
  bool has_iterate_ = false;
};

Iterate solve_ftrl(const Eigen::VectorXd& loss, const Regularizer& reg, const DomainSpec& dom,
                   const Iterate* warm = nullptr, double tol = 1e-9);

/// Hessian of R at a center, factored once for local-norm queries.
class LocalNormContext {
 public:
  LocalNormContext(const Regularizer& reg, const Eigen::VectorXd& w);
  LocalNormContext(Eigen::VectorXd center, const Eigen::MatrixXd& hessian);

  const Eigen::VectorXd& center() const { return center_; }
  Eigen::MatrixXd hessian() const;
  /// Hessian rebuilt from the stored factorization.
  Eigen::MatrixXd reconstructed_hessian() const;

  /// sqrt(l^T H^{-1} l)
  double local_norm(const Eigen::VectorXd& l) const;
  /// sqrt(x^T H x)
  double local_norm_dual(const Eigen::VectorXd& x) const;
  /// Membership in the Dikin ellipsoid of radius r, boundary included.
  bool dikin_contains(const Eigen::VectorXd& x, double r) const;

 private:
  void check_size(const Eigen::VectorXd& v) const;

  Eigen::VectorXd center_;
  std::optional<Eigen::VectorXd> diag_;
  Eigen::MatrixXd hess_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct SandwichReport {
  double worst_factor = 1.0;     // max over samples of max(lambda_max, 1 / lambda_min)
  double min_coord_ratio = 1.0;  // min_i w'(i) / w(i), separable regularizers only
  double max_coord_ratio = 1.0;
  int samples = 0;
};

/// Samples w' uniformly in the Dikin ellipsoid D_R(w, radius) and records the
/// generalized eigenvalues of the Hessian at w' against the Hessian at w.
SandwichReport hessian_sandwich_check(const Regularizer& reg, const Eigen::VectorXd& w, double radius,
                                      int n_samples, std::mt19937_64& rng);

}  // namespace dftrl
