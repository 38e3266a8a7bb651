#pragma once

#include <variant>

#include <Eigen/Core>

#include "dftrl/barrier.hpp"

namespace dftrl {

/// R(w) = sum_i w_i log(w_i) / eta - log(w_i) / gamma on the positive orthant.
struct EntropyLogBarrier {
  double eta = 1.0;
  double gamma = 0.5;
};

/// R(w) = |w|^2 / eta + Psi(w) / gamma for a self-concordant barrier Psi.
struct QuadraticPlusBarrier {
  double eta = 1.0;
  double gamma = 0.5;
  BarrierSpec barrier;
};

class Regularizer {
 public:
  using Variant = std::variant<EntropyLogBarrier, QuadraticPlusBarrier>;

  Regularizer(EntropyLogBarrier r, int dim);
  explicit Regularizer(QuadraticPlusBarrier r);

  const Variant& variant() const { return variant_; }
  int dim() const { return dim_; }
  double eta() const;
  double gamma() const;

  /// True when the Hessian is diagonal (entropy/log-barrier family).
  bool is_separable() const { return std::holds_alternative<EntropyLogBarrier>(variant_); }

  /// Strict feasibility for the barrier terms of R.
  bool in_domain(const Eigen::VectorXd& w) const;

  // All three throw RejectedInput outside in_domain.
  double value(const Eigen::VectorXd& w) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& w) const;

  /// Diagonal of the Hessian; only for separable regularizers.
  Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& w) const;

 private:
  void require_domain(const Eigen::VectorXd& w) const;

  Variant variant_;
  int dim_;
};

}  // namespace dftrl
