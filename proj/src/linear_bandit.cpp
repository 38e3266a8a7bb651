#include "dftrl/linear_bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dftrl/counter_rng.hpp"
#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/matrix_functions.hpp"
#include "dftrl/polyhedra.hpp"

namespace dftrl {

using detail::Overloaded;

namespace {

constexpr long kChunk = 4096;

Eigen::MatrixXd hessian_sqrt(const Regularizer& reg, const Eigen::VectorXd& w) { return sym_sqrt(reg.hessian(w)); }

struct Partial {
  Eigen::VectorXd sum;
  Eigen::VectorXd sum_sq;
};

Partial estimator_chunk(const Eigen::VectorXd& loss, const Eigen::VectorXd& w, const SymRoots& roots, long begin,
                        long end, std::uint64_t seed, long chunk) {
  const int k = static_cast<int>(w.size());
  std::mt19937_64 rng(counter_hash({seed, static_cast<std::uint64_t>(chunk)}));
  Partial p{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
  for (long i = begin; i < end; ++i) {
    const Eigen::VectorXd v = sphere_draw(k, rng);
    const Eigen::VectorXd a = w + roots.inv_sqrt * v;
    const Eigen::VectorXd est = k * loss.dot(a) * (roots.sqrt * v);
    p.sum += est;
    p.sum_sq += est.cwiseAbs2();
  }
  return p;
}

EstimatorMoments finish_moments(const std::vector<Partial>& parts, long draws, int k) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(k), sum_sq = Eigen::VectorXd::Zero(k);
  for (const auto& p : parts) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  EstimatorMoments m;
  m.draws = draws;
  m.mean = sum / static_cast<double>(draws);
  const Eigen::VectorXd var = (sum_sq / static_cast<double>(draws) - m.mean.cwiseAbs2()).cwiseMax(0.0);
  m.std_error = (var / static_cast<double>(draws)).cwiseSqrt();
  return m;
}

void check_moment_inputs(const Eigen::VectorXd& loss, const Eigen::VectorXd& w, const Regularizer& reg, long draws) {
  if (draws < 1) throw RejectedInput("estimator moments: need at least one draw");
  if (loss.size() != w.size() || w.size() != reg.dim()) throw RejectedInput("estimator moments: dimension mismatch");
}

}  // namespace

BarrierSpec barrier_for(const DomainSpec& dom) {
  return std::visit(Overloaded{[](const Ball& b) { return BarrierSpec(BallBarrier{b.dim, b.radius}); },
                               [](const Polytope& p) { return BarrierSpec(PolytopeLogBarrier{p.a, p.b}); },
                               [](const auto&) -> BarrierSpec {
                                 throw RejectedInput("linear bandit: domain must be a ball or a polytope");
                               }},
                    dom.variant());
}

double domain_radius(const DomainSpec& dom) {
  return std::visit(Overloaded{[](const Ball& b) { return b.radius; },
                               [](const Polytope& p) {
                                 double r = 0.0;
                                 for (const auto& v : enumerate_vertices(p.a, p.b)) r = std::max(r, v.norm());
                                 return r;
                               },
                               [](const auto&) -> double {
                                 throw RejectedInput("linear bandit: domain must be a ball or a polytope");
                               }},
                    dom.variant());
}

LinearParams tune_linban(double radius, int dim, int horizon, long long total_missing, int d_max, double nu) {
  if (!(radius > 0.0)) throw RejectedInput("linear tuning: B must be positive");
  if (dim < 1 || horizon < 1) throw RejectedInput("linear tuning: need K >= 1 and T >= 1");
  if (total_missing < 0) throw RejectedInput("linear tuning: D must be >= 0");
  if (!(nu >= 1.0)) throw RejectedInput("linear tuning: nu must be >= 1");
  LinearParams p;
  p.radius = radius;
  p.dim = dim;
  p.horizon = horizon;
  p.total_missing = total_missing;
  p.d_max = std::max(1, d_max);
  p.nu = nu;
  const double b = radius, k = dim, t = horizon, d = p.d_max, big_d = static_cast<double>(total_missing);
  const double g1 = 1.0 / (64.0 * b * k * (1.0 + d));
  p.gamma = std::min(g1 * g1, std::sqrt(nu * std::log(1.0 + std::sqrt(t)) / (16.0 * b * b * k * k * t)));
  const double e1 = 1.0 / (16.0 * d);
  p.eta = total_missing == 0 ? e1 * e1 : std::min(e1 * e1, std::sqrt(b * b / (16.0 * big_d)));
  return p;
}

double theorem_bound_lin(const LinearParams& p) {
  const double b = p.radius, k = p.dim, t = p.horizon, d = p.d_max, big_d = static_cast<double>(p.total_missing);
  const double log_t = std::log(t);
  return 14.0 * b * k * std::sqrt(p.nu * t * log_t) + 8.0 * b * std::sqrt(big_d) +
         16384.0 * p.nu * b * b * k * k * (1.0 + d) * (1.0 + d) * log_t;
}

Eigen::VectorXd sphere_draw(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  double n = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
    n = v.norm();
  } while (n == 0.0);
  return v / n;
}

LinearAction sample_linban_action(const Eigen::VectorXd& w, const Regularizer& reg, std::mt19937_64& rng) {
  if (!reg.in_domain(w)) throw RejectedInput("linear sampler: w is not strictly interior");
  LinearAction out;
  out.v = sphere_draw(static_cast<int>(w.size()), rng);
  out.a = w + sym_inv_sqrt(reg.hessian(w)) * out.v;
  return out;
}

LinearAction sample_linban_action(const Eigen::VectorXd& w, const Regularizer& reg, const DomainSpec& dom,
                                  std::mt19937_64& rng) {
  LinearAction out = sample_linban_action(w, reg, rng);
  if (dom.check(out.a).min_slack < 0.0) throw InvariantViolation("linear sampler: action left the domain");
  return out;
}

Eigen::VectorXd lin_estimate(double feedback, const Eigen::VectorXd& v, const Regularizer& reg,
                             const Eigen::VectorXd& w) {
  if (v.size() != w.size()) throw RejectedInput("linear estimate: dimension mismatch");
  return static_cast<double>(w.size()) * feedback * (hessian_sqrt(reg, w) * v);
}

Eigen::VectorXd best_in_hindsight_lin(const Eigen::VectorXd& cumulative_loss, const DomainSpec& dom) {
  if (cumulative_loss.size() != dom.dim()) throw RejectedInput("linear comparator: dimension mismatch");
  return std::visit(Overloaded{[&](const Ball& b) -> Eigen::VectorXd {
                                 const double n = cumulative_loss.norm();
                                 if (n == 0.0) return Eigen::VectorXd::Zero(b.dim);
                                 return -b.radius * cumulative_loss / n;
                               },
                               [&](const Polytope& p) -> Eigen::VectorXd {
                                 const auto verts = enumerate_vertices(p.a, p.b);
                                 if (verts.empty()) throw RejectedInput("linear comparator: polytope has no vertices");
                                 std::size_t best = 0;
                                 for (std::size_t j = 1; j < verts.size(); ++j)
                                   if (cumulative_loss.dot(verts[j]) < cumulative_loss.dot(verts[best])) best = j;
                                 return verts[best];
                               },
                               [](const auto&) -> Eigen::VectorXd {
                                 throw RejectedInput("linear comparator: domain must be a ball or a polytope");
                               }},
                    dom.variant());
}

Eigen::VectorXd shifted_comparator(const Eigen::VectorXd& u, const Eigen::VectorXd& w1, double delta) {
  if (!(delta > 0.0)) throw RejectedInput("shifted comparator: delta must be positive");
  return w1 + (u - w1) / (1.0 + delta);
}

EstimatorMoments estimator_moments_serial(const Eigen::VectorXd& loss, const Eigen::VectorXd& w,
                                          const Regularizer& reg, long draws, std::uint64_t seed) {
  check_moment_inputs(loss, w, reg, draws);
  const SymRoots roots = sym_roots(reg.hessian(w));
  const long chunks = (draws + kChunk - 1) / kChunk;
  std::vector<Partial> parts(chunks);
  for (long c = 0; c < chunks; ++c)
    parts[c] = estimator_chunk(loss, w, roots, c * kChunk, std::min(draws, (c + 1) * kChunk), seed, c);
  return finish_moments(parts, draws, static_cast<int>(w.size()));
}

EstimatorMoments estimator_moments_parallel(const Eigen::VectorXd& loss, const Eigen::VectorXd& w,
                                            const Regularizer& reg, long draws, std::uint64_t seed) {
  check_moment_inputs(loss, w, reg, draws);
  const SymRoots roots = sym_roots(reg.hessian(w));
  const long chunks = (draws + kChunk - 1) / kChunk;
  std::vector<Partial> parts(chunks);
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < chunks; ++c)
    parts[c] = estimator_chunk(loss, w, roots, c * kChunk, std::min(draws, (c + 1) * kChunk), seed, c);
  return finish_moments(parts, draws, static_cast<int>(w.size()));
}

LinearLearner::LinearLearner(DomainSpec dom, LinearParams params, SolverOptions opts)
    : params_(params),
      ftrl_(Regularizer(QuadraticPlusBarrier{params.eta, params.gamma, barrier_for(dom)}), dom, opts),
      monitor_(params.d_max, InvariantMonitor::default_norm_budget(params.d_max)) {
  if (dom.dim() != params.dim) throw RejectedInput("linear learner: K does not match the domain");
}

const Iterate& LinearLearner::prepare_round(int t) {
  round_ = t;
  const Iterate& it = ftrl_.update();
  monitor_.record_iterate(ftrl_.regularizer(), it.w);
  return it;
}

Eigen::VectorXd LinearLearner::play(std::mt19937_64& rng) {
  const Eigen::VectorXd& w = ftrl_.current().w;
  LinearAction act = sample_linban_action(w, ftrl_.regularizer(), rng);
  monitor_.record_feasibility(domain().check(act.a).min_slack >= 0.0);
  pending_[round_] = Record{w, act.v};
  return act.a;
}

Eigen::VectorXd LinearLearner::receive(int tau, double feedback) {
  const auto it = pending_.find(tau);
  if (it == pending_.end()) throw RejectedInput("linear bandit: feedback for a round that was not played");
  const Eigen::VectorXd est = lin_estimate(feedback, it->second.v, ftrl_.regularizer(), it->second.w);
  const LocalNormContext ctx(ftrl_.regularizer(), it->second.w);
  monitor_.record_estimate(ctx, est);
  worst_identity_gap_ =
      std::max(worst_identity_gap_, std::abs(ctx.local_norm(est) - params_.dim * std::abs(feedback)));
  ftrl_.add_estimate(est);
  pending_.erase(it);
  return est;
}

}  // namespace dftrl
