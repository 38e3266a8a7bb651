#pragma once

#include <variant>

#include <Eigen/Core>

namespace dftrl {

/// Psi(w) = -log(1 - |w|^2 / B^2). A 1-self-concordant barrier for the
/// Euclidean ball of radius B.
struct BallBarrier {
  int dim = 0;
  double radius = 1.0;
};

/// Psi(w) = -sum_i log(b_i - a_i^T w) over the rows of {A w <= b}.
/// Self-concordance parameter equals the number of rows.
struct PolytopeLogBarrier {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

/// First three derivatives of Psi along a single direction.
struct DirectionalDerivatives {
  double first = 0.0;
  double second = 0.0;
  double third = 0.0;
};

class BarrierSpec {
 public:
  using Variant = std::variant<BallBarrier, PolytopeLogBarrier>;

  BarrierSpec(BallBarrier ball);
  BarrierSpec(PolytopeLogBarrier polytope);

  const Variant& variant() const { return variant_; }
  int dim() const;
  double nu() const;

  /// True iff every barrier argument is strictly positive at w.
  bool contains(const Eigen::VectorXd& w) const;

  double value(const Eigen::VectorXd& w) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& w) const;

  /// d^k/dt^k Psi(w + t h) at t = 0 for k = 1, 2, 3.
  DirectionalDerivatives directional(const Eigen::VectorXd& w, const Eigen::VectorXd& h) const;

 private:
  void require_interior(const Eigen::VectorXd& w) const;

  Variant variant_;
};

}  // namespace dftrl
