#include "dftrl/ftrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "dftrl/errors.hpp"

namespace dftrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Solves H y = v for symmetric PD H after Jacobi scaling. A growing ridge is
// added only when the scaled matrix is numerically indefinite.
class ScaledCholesky {
 public:
  explicit ScaledCholesky(const Eigen::MatrixXd& h) {
    scale_ = h.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd hs = scale_.asDiagonal() * h * scale_.asDiagonal();
    double ridge = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      llt_.compute(hs);
      if (llt_.info() == Eigen::Success) return;
      ridge = ridge == 0.0 ? 1e-14 : ridge * 100.0;
      hs.diagonal().array() += ridge;
    }
    throw NumericalError("newton: Hessian is not positive definite");
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& v) const {
    return scale_.asDiagonal() * llt_.solve(scale_.asDiagonal() * v);
  }

 private:
  Eigen::VectorXd scale_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace

struct FtrlProblem::Eval {
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  double scale = 1.0;
};

FtrlProblem::FtrlProblem(Regularizer reg, DomainSpec dom, SolverOptions opts)
    : reg_(std::move(reg)), dom_(std::move(dom)), opts_(opts), form_(dom_.formulate()) {
  if (!(opts_.tol > 0.0)) throw RejectedInput("ftrl: tolerance must be positive");
  if (reg_.dim() != dom_.dim()) throw RejectedInput("ftrl: regularizer and domain dimensions differ");
  if (form_.eq_a.rows() > 0) {
    eq_gram_.compute(form_.eq_a * form_.eq_a.transpose());
    if (eq_gram_.info() != Eigen::Success) throw NumericalError("ftrl: equality constraints are degenerate");
  }
  if (!strictly_feasible(form_.start) && !form_.single_point)
    throw RejectedInput("ftrl: domain has no strictly feasible start");
  // The penalty weight is relative to the regularizer's gradient scale, so that
  // the equilibrium slacks of near-active rows stay far above roundoff.
  final_penalty_ = opts_.penalty;
  if (!form_.single_point)
    final_penalty_ *= std::max(1.0, inf_norm(reg_.gradient(form_.to_decision(form_.start))));
}

bool FtrlProblem::strictly_feasible(const Eigen::VectorXd& x) const {
  if (x.size() != form_.solver_dim || !x.allFinite()) return false;
  if (form_.ineq_g.rows() > 0 && !((form_.ineq_h - form_.ineq_g * x).array() > 0.0).all()) return false;
  return reg_.in_domain(form_.to_decision(x));
}

double FtrlProblem::equality_violation(const Eigen::VectorXd& x) const {
  if (form_.eq_a.rows() == 0) return 0.0;
  return inf_norm(form_.eq_a * x - form_.eq_b);
}

double FtrlProblem::objective(const Eigen::VectorXd& loss, const Eigen::VectorXd& x, double mu) const {
  if (!strictly_feasible(x)) return kInf;
  const Eigen::VectorXd w = form_.to_decision(x);
  double f = loss.dot(w) + reg_.value(w);
  if (form_.ineq_g.rows() > 0) f -= mu * (form_.ineq_h - form_.ineq_g * x).array().log().sum();
  return f;
}

FtrlProblem::Eval FtrlProblem::evaluate(const Eigen::VectorXd& loss, const Eigen::VectorXd& x, double mu) const {
  Eval e;
  const Eigen::VectorXd w = form_.to_decision(x);
  const Eigen::VectorXd grad_r = reg_.gradient(w);
  const Eigen::VectorXd gw = loss + grad_r;
  Eigen::MatrixXd hw;
  if (reg_.is_separable()) {
    hw = reg_.hessian_diagonal(w).asDiagonal();
  } else {
    hw = reg_.hessian(w);
  }
  if (form_.lift) {
    e.g = form_.lift->transpose() * gw;
    e.h = form_.lift->transpose() * hw * *form_.lift;
  } else {
    e.g = gw;
    e.h = std::move(hw);
  }
  e.scale = std::max({1.0, inf_norm(loss), inf_norm(grad_r)});
  if (form_.ineq_g.rows() > 0) {
    const Eigen::VectorXd inv_s = (form_.ineq_h - form_.ineq_g * x).cwiseInverse();
    const Eigen::VectorXd pg = mu * form_.ineq_g.transpose() * inv_s;
    e.g += pg;
    e.h += mu * form_.ineq_g.transpose() * inv_s.cwiseAbs2().asDiagonal() * form_.ineq_g;
    e.scale = std::max(e.scale, inf_norm(pg));
  }
  return e;
}

Eigen::VectorXd FtrlProblem::project_null(const Eigen::VectorXd& g) const {
  if (form_.eq_a.rows() == 0) return g;
  return g - form_.eq_a.transpose() * eq_gram_.solve(form_.eq_a * g);
}

Iterate FtrlProblem::finish(const Eigen::VectorXd& x, double residual, int steps) const {
  Iterate it;
  it.x = x;
  it.w = form_.to_decision(x);
  it.kkt_residual = residual;
  it.newton_steps = steps;
  it.feasibility_slack = form_.lift ? x.minCoeff() : dom_.check(it.w).min_slack;
  return it;
}

Iterate FtrlProblem::solve(const Eigen::VectorXd& loss, const Iterate* warm) const {
  if (loss.size() != reg_.dim()) throw RejectedInput("ftrl: loss has wrong dimension");
  if (!loss.allFinite()) throw RejectedInput("ftrl: loss is not finite");
  if (form_.single_point) return finish(form_.start, 0.0, 0);

  Eigen::VectorXd x = form_.start;
  bool warm_used = false;
  if (warm != nullptr && strictly_feasible(warm->x) && equality_violation(warm->x) <= 1e-10) {
    x = warm->x;
    warm_used = true;
  }

  // Cold starts follow the central path of the inequality penalty down to its
  // final weight; warm starts are already close to it.
  const bool has_rows = form_.ineq_g.rows() > 0;
  double mu = has_rows && !warm_used ? std::max(final_penalty_, opts_.initial_penalty) : final_penalty_;

  const int n_eq = static_cast<int>(form_.eq_a.rows());
  Eigen::VectorXd best = x;
  double best_residual = kInf;
  for (int step = 0; step <= opts_.max_steps; ++step) {
    const Eval e = evaluate(loss, x, mu);
    const double residual = inf_norm(project_null(e.g)) / e.scale;
    const bool final_stage = mu <= final_penalty_;
    if (final_stage && residual < best_residual) {
      best_residual = residual;
      best = x;
    }
    if (final_stage && residual <= opts_.tol) return finish(x, residual, step);
    if (step == opts_.max_steps) break;

    const ScaledCholesky chol(e.h);
    Eigen::VectorXd dx = -chol.solve(e.g);
    if (n_eq > 0) {
      const Eigen::MatrixXd y = chol.solve(form_.eq_a.transpose());
      const Eigen::MatrixXd schur = form_.eq_a * y;
      const Eigen::VectorXd r = form_.eq_a * x - form_.eq_b;
      const Eigen::VectorXd nu = schur.ldlt().solve(r + form_.eq_a * dx);
      dx -= y * nu;
    }

    const double slope = e.g.dot(dx);
    if (!final_stage && -slope <= 0.1 * mu) {
      mu = std::max(final_penalty_, mu * opts_.penalty_decrease);
      continue;
    }
    double t = 1.0;
    while (t > 1e-300 && !strictly_feasible(x + t * dx)) t *= opts_.shrink;
    const double f0 = objective(loss, x, mu);
    const double slack = 1e-14 * (1.0 + std::abs(f0));
    while (t > 1e-20 && objective(loss, x + t * dx, mu) > f0 + opts_.armijo * t * std::min(slope, 0.0) + slack)
      t *= opts_.shrink;
    if (t <= 1e-20) break;
    x += t * dx;
  }
  std::ostringstream msg;
  msg << "ftrl: Newton did not reach tolerance " << opts_.tol << " within " << opts_.max_steps
      << " steps (best residual " << best_residual << ")";
  throw ConvergenceError(msg.str(), form_.to_decision(best), best_residual);
}

Iterate solve_ftrl(const Eigen::VectorXd& loss, const Regularizer& reg, const DomainSpec& dom, const Iterate* warm,
                   double tol) {
  SolverOptions opts;
  opts.tol = tol;
  return FtrlProblem(reg, dom, opts).solve(loss, warm);
}

FtrlState::FtrlState(Regularizer reg, DomainSpec dom, SolverOptions opts)
    : problem_(std::move(reg), std::move(dom), opts), cumulative_(Eigen::VectorXd::Zero(problem_.regularizer().dim())) {}

void FtrlState::add_estimate(const Eigen::VectorXd& estimate) {
  if (estimate.size() != cumulative_.size()) throw RejectedInput("ftrl state: estimate has wrong dimension");
  cumulative_ += estimate;
}

const Iterate& FtrlState::update() {
  iterate_ = problem_.solve(cumulative_, has_iterate_ ? &iterate_ : nullptr);
  has_iterate_ = true;
  return iterate_;
}

const Iterate& FtrlState::current() const {
  if (!has_iterate_) throw RejectedInput("ftrl state: no iterate computed yet");
  return iterate_;
}

// ---------------------------------------------------------------------------

LocalNormContext::LocalNormContext(const Regularizer& reg, const Eigen::VectorXd& w) : center_(w) {
  if (reg.is_separable()) {
    diag_ = reg.hessian_diagonal(w);
    if (!((diag_->array() > 0.0).all() && diag_->allFinite()))
      throw NumericalError("local norm: Hessian diagonal is not positive");
  } else {
    hess_ = reg.hessian(w);
    llt_.compute(hess_);
    if (llt_.info() != Eigen::Success) throw NumericalError("local norm: Hessian factorization failed");
  }
}

LocalNormContext::LocalNormContext(Eigen::VectorXd center, const Eigen::MatrixXd& hessian)
    : center_(std::move(center)), hess_(hessian) {
  if (hess_.rows() != center_.size() || hess_.cols() != center_.size())
    throw RejectedInput("local norm: Hessian and center sizes differ");
  llt_.compute(hess_);
  if (llt_.info() != Eigen::Success) throw NumericalError("local norm: Hessian factorization failed");
}

Eigen::MatrixXd LocalNormContext::hessian() const {
  if (diag_) return diag_->asDiagonal();
  return hess_;
}

Eigen::MatrixXd LocalNormContext::reconstructed_hessian() const {
  if (diag_) return diag_->asDiagonal();
  const Eigen::MatrixXd l = llt_.matrixL();
  return l * l.transpose();
}

void LocalNormContext::check_size(const Eigen::VectorXd& v) const {
  if (v.size() != center_.size()) throw RejectedInput("local norm: dimension mismatch");
}

double LocalNormContext::local_norm(const Eigen::VectorXd& l) const {
  check_size(l);
  if (diag_) return std::sqrt((l.array().square() / diag_->array()).sum());
  return llt_.matrixL().solve(l).norm();
}

double LocalNormContext::local_norm_dual(const Eigen::VectorXd& x) const {
  check_size(x);
  if (diag_) return std::sqrt((x.array().square() * diag_->array()).sum());
  return (llt_.matrixU() * x).norm();
}

bool LocalNormContext::dikin_contains(const Eigen::VectorXd& x, double r) const {
  return local_norm_dual(x - center_) <= r;
}

SandwichReport hessian_sandwich_check(const Regularizer& reg, const Eigen::VectorXd& w, double radius,
                                      int n_samples, std::mt19937_64& rng) {
  if (!(radius >= 0.0)) throw RejectedInput("sandwich check: radius must be nonnegative");
  const LocalNormContext ctx(reg, w);
  const int n = static_cast<int>(w.size());
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const Eigen::MatrixXd h0 = reg.hessian(w);
  Eigen::LLT<Eigen::MatrixXd> llt0;
  if (!reg.is_separable()) llt0.compute(h0);

  SandwichReport rep;
  for (int k = 0; k < n_samples; ++k) {
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = normal(rng);
    u *= std::pow(unif(rng), 1.0 / n) / u.norm();
    // x^T H x = |u|^2 radius^2 for x = radius * H^{-1/2} u.
    Eigen::VectorXd x = reg.is_separable() ? Eigen::VectorXd(u.cwiseQuotient(h0.diagonal().cwiseSqrt()))
                                           : Eigen::VectorXd(llt0.matrixU().solve(u));
    const Eigen::VectorXd wp = w + radius * x;
    ++rep.samples;
    if (!reg.in_domain(wp)) {
      rep.worst_factor = kInf;
      continue;
    }
    if (reg.is_separable()) {
      const Eigen::ArrayXd ratio = reg.hessian_diagonal(wp).array() / h0.diagonal().array();
      rep.worst_factor = std::max({rep.worst_factor, ratio.maxCoeff(), 1.0 / ratio.minCoeff()});
      const Eigen::ArrayXd coord = wp.array() / w.array();
      rep.min_coord_ratio = std::min(rep.min_coord_ratio, coord.minCoeff());
      rep.max_coord_ratio = std::max(rep.max_coord_ratio, coord.maxCoeff());
    } else {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(reg.hessian(wp), h0, Eigen::EigenvaluesOnly);
      const Eigen::VectorXd ev = ges.eigenvalues();
      rep.worst_factor = std::max({rep.worst_factor, ev.maxCoeff(), 1.0 / ev.minCoeff()});
    }
  }
  return rep;
}

}  // namespace dftrl
