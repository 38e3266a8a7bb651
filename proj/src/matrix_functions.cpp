#include "dftrl/matrix_functions.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "dftrl/errors.hpp"

namespace dftrl {

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose_pd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw RejectedInput("sym_sqrt: matrix is not square");
  if (!m.allFinite()) throw NumericalError("sym_sqrt: matrix has non-finite entries");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw NumericalError("sym_sqrt: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw NumericalError("sym_sqrt: eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("sym_sqrt: matrix is not positive definite");
  return eig;
}

}  // namespace

SymRoots sym_roots(const Eigen::MatrixXd& m) {
  const auto eig = decompose_pd(m);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseSqrt();
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return {q * root.asDiagonal() * q.transpose(),
          q * root.cwiseInverse().asDiagonal() * q.transpose()};
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& m) {
  const auto eig = decompose_pd(m);
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return q * eig.eigenvalues().cwiseSqrt().asDiagonal() * q.transpose();
}

Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& m) {
  const auto eig = decompose_pd(m);
  const Eigen::MatrixXd& q = eig.eigenvectors();
  return q * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
}

}  // namespace dftrl
