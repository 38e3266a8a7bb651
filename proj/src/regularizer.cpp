#include "dftrl/regularizer.hpp"

#include <cmath>

#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"

namespace dftrl {

using detail::Overloaded;

namespace {

void check_rates(double eta, double gamma) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw RejectedInput("regularizer: eta must be positive and finite");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw RejectedInput("regularizer: gamma must be positive and finite");
}

}  // namespace

Regularizer::Regularizer(EntropyLogBarrier r, int dim) : variant_(r), dim_(dim) {
  check_rates(r.eta, r.gamma);
  if (dim < 1) throw RejectedInput("regularizer: dimension must be positive");
}

Regularizer::Regularizer(QuadraticPlusBarrier r) : variant_(r), dim_(r.barrier.dim()) {
  check_rates(r.eta, r.gamma);
}

double Regularizer::eta() const {
  return std::visit([](const auto& r) { return r.eta; }, variant_);
}

double Regularizer::gamma() const {
  return std::visit([](const auto& r) { return r.gamma; }, variant_);
}

bool Regularizer::in_domain(const Eigen::VectorXd& w) const {
  if (w.size() != dim_ || !w.allFinite()) return false;
  return std::visit(Overloaded{[&](const EntropyLogBarrier&) { return (w.array() > 0.0).all(); },
                               [&](const QuadraticPlusBarrier& r) { return r.barrier.contains(w); }},
                    variant_);
}

void Regularizer::require_domain(const Eigen::VectorXd& w) const {
  if (w.size() != dim_) throw RejectedInput("regularizer: dimension mismatch");
  if (!in_domain(w)) throw RejectedInput("regularizer: point outside the regularizer domain");
}

double Regularizer::value(const Eigen::VectorXd& w) const {
  require_domain(w);
  return std::visit(Overloaded{[&](const EntropyLogBarrier& r) {
                                 const Eigen::ArrayXd lw = w.array().log();
                                 return (w.array() * lw).sum() / r.eta - lw.sum() / r.gamma;
                               },
                               [&](const QuadraticPlusBarrier& r) {
                                 return w.squaredNorm() / r.eta + r.barrier.value(w) / r.gamma;
                               }},
                    variant_);
}

Eigen::VectorXd Regularizer::gradient(const Eigen::VectorXd& w) const {
  require_domain(w);
  return std::visit(Overloaded{[&](const EntropyLogBarrier& r) -> Eigen::VectorXd {
                                 return ((w.array().log() + 1.0) / r.eta - w.array().inverse() / r.gamma).matrix();
                               },
                               [&](const QuadraticPlusBarrier& r) -> Eigen::VectorXd {
                                 return (2.0 / r.eta) * w + r.barrier.gradient(w) / r.gamma;
                               }},
                    variant_);
}

Eigen::VectorXd Regularizer::hessian_diagonal(const Eigen::VectorXd& w) const {
  require_domain(w);
  const auto* r = std::get_if<EntropyLogBarrier>(&variant_);
  if (r == nullptr) throw RejectedInput("regularizer: Hessian is not diagonal for this family");
  return (w.array().inverse() / r->eta + w.array().square().inverse() / r->gamma).matrix();
}

Eigen::MatrixXd Regularizer::hessian(const Eigen::VectorXd& w) const {
  if (is_separable()) return hessian_diagonal(w).asDiagonal();
  require_domain(w);
  const auto& r = std::get<QuadraticPlusBarrier>(variant_);
  Eigen::MatrixXd h = r.barrier.hessian(w) / r.gamma;
  h.diagonal().array() += 2.0 / r.eta;
  return h;
}

}  // namespace dftrl
