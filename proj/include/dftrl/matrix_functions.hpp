#pragma once

#include <Eigen/Core>

namespace dftrl {

/// Symmetric square root of a symmetric positive-definite matrix, computed
/// from its eigendecomposition. Throws NumericalError if M is not PD.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& m);

/// Inverse of sym_sqrt(M).
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& m);

/// Both roots from one eigendecomposition.
struct SymRoots {
  Eigen::MatrixXd sqrt;
  Eigen::MatrixXd inv_sqrt;
};
SymRoots sym_roots(const Eigen::MatrixXd& m);

}  // namespace dftrl
