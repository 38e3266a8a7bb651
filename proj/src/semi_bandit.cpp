#include "dftrl/semi_bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/polyhedra.hpp"

namespace dftrl {

using detail::Overloaded;

namespace {

constexpr double kHullTol = 1e-9;

void check_in_capped_simplex(const Eigen::VectorXd& w, const MSets& m) {
  if (w.size() != m.dim) throw RejectedInput("semi-bandit: mean vector has wrong dimension");
  if (std::abs(w.sum() - m.budget) > kHullTol || w.minCoeff() < -kHullTol || w.maxCoeff() > 1.0 + kHullTol)
    throw RejectedInput("semi-bandit: mean vector is outside the hull of the action set");
}

// Cumulative sums of w, rescaled so the last one equals B exactly.
std::vector<double> cumulative(const Eigen::VectorXd& w, int budget) {
  std::vector<double> c(w.size() + 1, 0.0);
  for (Eigen::Index i = 0; i < w.size(); ++i) c[i + 1] = c[i] + std::clamp(w(i), 0.0, 1.0);
  const double total = c.back();
  for (double& v : c) v *= budget / total;
  c.back() = budget;
  return c;
}

}  // namespace

CombActionSet::CombActionSet(MSets m) : variant_(m) {
  if (m.dim < 1 || m.budget < 1 || m.budget > m.dim) throw RejectedInput("semi-bandit: need 1 <= B <= K");
}

CombActionSet::CombActionSet(ExplicitVertices v) : variant_(std::move(v)) {
  const Eigen::MatrixXd& m = std::get<ExplicitVertices>(variant_).vertices;
  if (m.rows() < 1 || m.cols() < 1) throw RejectedInput("semi-bandit: empty action list");
  if (!(m.array() == 0.0 || m.array() == 1.0).all()) throw RejectedInput("semi-bandit: actions must be binary");
}

int CombActionSet::dim() const {
  return std::visit(Overloaded{[](const MSets& m) { return m.dim; },
                               [](const ExplicitVertices& v) { return static_cast<int>(v.vertices.rows()); }},
                    variant_);
}

int CombActionSet::budget() const {
  return std::visit(Overloaded{[](const MSets& m) { return m.budget; },
                               [](const ExplicitVertices& v) {
                                 return static_cast<int>(std::lround(v.vertices.colwise().sum().maxCoeff()));
                               }},
                    variant_);
}

DomainSpec CombActionSet::domain() const {
  return std::visit(
      Overloaded{[](const MSets& m) { return DomainSpec(CappedSimplexHull{m.dim, static_cast<double>(m.budget)}); },
                 [](const ExplicitVertices& v) { return DomainSpec(VertexHull{v.vertices}); }},
      variant_);
}

SemiBanditParams tune_semibandit(int budget, int dim, int horizon, long long total_missing, int d_max) {
  if (budget < 1 || budget > dim) throw RejectedInput("semi-bandit tuning: need 1 <= B <= K");
  if (horizon < 1) throw RejectedInput("semi-bandit tuning: T must be >= 1");
  if (total_missing < 0) throw RejectedInput("semi-bandit tuning: D must be >= 0");
  SemiBanditParams p;
  p.budget = budget;
  p.dim = dim;
  p.horizon = horizon;
  p.total_missing = total_missing;
  p.d_max = std::max(1, d_max);
  const double b = budget, k = dim, t = horizon, d = p.d_max, big_d = static_cast<double>(total_missing);
  p.gamma = 1.0 / (64.0 * 64.0 * b * (1.0 + d) * (1.0 + d));
  p.eta = std::min(1.0 / (256.0 * b * d * d), std::sqrt(b * (1.0 + std::log(k / b)) / (16.0 * (k * t + b * big_d))));
  return p;
}

double theorem_bound_comb(const SemiBanditParams& p) {
  const double b = p.budget, k = p.dim, t = p.horizon, d = p.d_max, big_d = static_cast<double>(p.total_missing);
  const double log_kb = std::log(k / b);
  return 12.0 * std::sqrt(b * (k * t + b * big_d) * log_kb) + 4096.0 * b * (1.0 + d) * (1.0 + d) * k * std::log(t) +
         512.0 * b * b * d * d * log_kb;
}

Eigen::VectorXd systematic_sample(const Eigen::VectorXd& w, int budget, double u) {
  const std::vector<double> c = cumulative(w, budget);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(w.size());
  int j = 0;
  double point = u;
  for (Eigen::Index i = 0; i < w.size() && j < budget; ++i) {
    if (point < c[i + 1]) {
      a(i) = 1.0;
      ++j;
      point = u + j;
    }
  }
  return a;
}

std::vector<WeightedAction> decomposition_support(const Eigen::VectorXd& w, const CombActionSet& actions) {
  return std::visit(
      Overloaded{[&](const MSets& m) {
                   check_in_capped_simplex(w, m);
                   const std::vector<double> c = cumulative(w, m.budget);
                   // The outcome only changes where u crosses a fractional part of some c_i.
                   std::vector<double> cuts{0.0, 1.0};
                   for (double v : c) cuts.push_back(v - std::floor(v));
                   std::sort(cuts.begin(), cuts.end());
                   cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
                   std::vector<WeightedAction> out;
                   for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                     const double len = cuts[k + 1] - cuts[k];
                     if (len <= 0.0 || cuts[k] >= 1.0) continue;
                     out.push_back({len, systematic_sample(w, m.budget, 0.5 * (cuts[k] + cuts[k + 1]))});
                   }
                   return out;
                 },
                 [&](const ExplicitVertices& v) {
                   const auto lambda = find_convex_combination(v.vertices, w, kHullTol);
                   if (!lambda) throw RejectedInput("semi-bandit: mean vector is outside the hull of the action set");
                   std::vector<WeightedAction> out;
                   for (Eigen::Index j = 0; j < lambda->size(); ++j)
                     if ((*lambda)(j) > 0.0) out.push_back({(*lambda)(j), v.vertices.col(j)});
                   return out;
                 }},
      actions.variant());
}

Eigen::VectorXd sample_action(const Eigen::VectorXd& w, const CombActionSet& actions, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (const auto* m = std::get_if<MSets>(&actions.variant())) {
    check_in_capped_simplex(w, *m);
    return systematic_sample(w, m->budget, unif(rng));
  }
  const auto support = decomposition_support(w, actions);
  double u = unif(rng);
  for (const auto& s : support) {
    if (u < s.prob) return s.action;
    u -= s.prob;
  }
  return support.back().action;
}

Eigen::VectorXd iw_estimate(const Eigen::VectorXd& action, const Eigen::VectorXd& observed, const Eigen::VectorXd& w) {
  if (action.size() != w.size() || observed.size() != w.size())
    throw RejectedInput("semi-bandit estimate: dimension mismatch");
  Eigen::VectorXd est = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (action(i) == 0.0) continue;
    if (!(w(i) >= 1e-300)) throw NumericalError("semi-bandit estimate: selected coordinate has vanishing weight");
    est(i) = action(i) * observed(i) / w(i);
  }
  return est;
}

Eigen::VectorXd best_in_hindsight_comb(const Eigen::VectorXd& cumulative_loss, const CombActionSet& actions) {
  if (cumulative_loss.size() != actions.dim()) throw RejectedInput("semi-bandit comparator: dimension mismatch");
  return std::visit(Overloaded{[&](const MSets& m) {
                                 std::vector<int> idx(m.dim);
                                 std::iota(idx.begin(), idx.end(), 0);
                                 std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
                                   return cumulative_loss(a) < cumulative_loss(b);
                                 });
                                 Eigen::VectorXd a = Eigen::VectorXd::Zero(m.dim);
                                 for (int i = 0; i < m.budget; ++i) a(idx[i]) = 1.0;
                                 return a;
                               },
                               [&](const ExplicitVertices& v) {
                                 const Eigen::RowVectorXd values = cumulative_loss.transpose() * v.vertices;
                                 Eigen::Index best = 0;
                                 for (Eigen::Index j = 1; j < values.size(); ++j)
                                   if (values(j) < values(best)) best = j;
                                 return Eigen::VectorXd(v.vertices.col(best));
                               }},
                    actions.variant());
}

SemiBanditLearner::SemiBanditLearner(CombActionSet actions, SemiBanditParams params, SolverOptions opts)
    : actions_(std::move(actions)), params_(params),
      ftrl_(Regularizer(EntropyLogBarrier{params.eta, params.gamma}, actions_.dim()), actions_.domain(), opts),
      monitor_(params.d_max, InvariantMonitor::default_norm_budget(params.d_max)) {}

const Iterate& SemiBanditLearner::prepare_round(int t) {
  round_ = t;
  const Iterate& it = ftrl_.update();
  monitor_.record_iterate(ftrl_.regularizer(), it.w);
  return it;
}

Eigen::VectorXd SemiBanditLearner::play(std::mt19937_64& rng) {
  const Eigen::VectorXd& w = ftrl_.current().w;
  Eigen::VectorXd a = sample_action(w, actions_, rng);
  pending_[round_] = Record{w, a};
  return a;
}

Eigen::VectorXd SemiBanditLearner::receive(int tau, const Eigen::VectorXd& observed) {
  const auto it = pending_.find(tau);
  if (it == pending_.end()) throw RejectedInput("semi-bandit: feedback for a round that was not played");
  const Eigen::VectorXd est = iw_estimate(it->second.action, observed, it->second.w);
  monitor_.record_estimate(LocalNormContext(ftrl_.regularizer(), it->second.w), est);
  ftrl_.add_estimate(est);
  pending_.erase(it);
  return est;
}

}  // namespace dftrl
