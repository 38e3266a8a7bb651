#include "dftrl/polyhedra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "dftrl/errors.hpp"

namespace dftrl {

std::optional<Eigen::VectorXd> find_convex_combination(const Eigen::MatrixXd& vertices,
                                                       const Eigen::VectorXd& point, double tol) {
  const int k = static_cast<int>(vertices.rows());
  const int m = static_cast<int>(vertices.cols());
  if (m == 0) throw RejectedInput("convex combination: empty vertex set");
  if (point.size() != k) throw RejectedInput("convex combination: dimension mismatch");

  // Rows: vertices * lambda = point, 1^T lambda = 1. One artificial per row.
  const int rows = k + 1;
  const int cols = m + rows;
  Eigen::MatrixXd tab = Eigen::MatrixXd::Zero(rows, cols + 1);
  tab.topLeftCorner(k, m) = vertices;
  tab.block(k, 0, 1, m).setOnes();
  tab.block(0, cols, k, 1) = point;
  tab(k, cols) = 1.0;
  for (int r = 0; r < rows; ++r) {
    if (tab(r, cols) < 0.0) tab.row(r) *= -1.0;
    tab(r, m + r) = 1.0;
  }
  std::vector<int> basis(rows);
  for (int r = 0; r < rows; ++r) basis[r] = m + r;

  // Phase-one objective: minimize the sum of artificials.
  Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(cols + 1);
  for (int r = 0; r < rows; ++r) cost -= tab.row(r);
  for (int r = 0; r < rows; ++r) cost(m + r) = 0.0;

  constexpr double kPivotTol = 1e-12;
  for (int iter = 0; iter < 50 * (rows + cols); ++iter) {
    int enter = -1;
    for (int j = 0; j < cols; ++j) {
      if (cost(j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      if (tab(r, enter) > kPivotTol) {
        const double ratio = tab(r, cols) / tab(r, enter);
        if (leave < 0 || ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur in phase one
    tab.row(leave) /= tab(leave, enter);
    for (int r = 0; r < rows; ++r) {
      if (r != leave && tab(r, enter) != 0.0) tab.row(r) -= tab(r, enter) * tab.row(leave);
    }
    cost -= cost(enter) * tab.row(leave);
    basis[leave] = enter;
  }

  double infeasibility = 0.0;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  for (int r = 0; r < rows; ++r) {
    if (basis[r] < m) {
      lambda(basis[r]) = std::max(0.0, tab(r, cols));
    } else {
      infeasibility += std::abs(tab(r, cols));
    }
  }
  const double scale = std::max(1.0, point.cwiseAbs().maxCoeff());
  if (infeasibility > tol * scale) return std::nullopt;
  const double total = lambda.sum();
  if (!(total > 0.0)) return std::nullopt;
  lambda /= total;
  if ((vertices * lambda - point).cwiseAbs().maxCoeff() > tol * scale) return std::nullopt;
  return lambda;
}

std::vector<Eigen::VectorXd> enumerate_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol,
                                                long max_subsets) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (m != b.size()) throw RejectedInput("vertex enumeration: A and b row counts differ");
  if (n == 0 || m < n) throw RejectedInput("vertex enumeration: polytope needs at least dim constraints");

  // Count subsets first so an oversized problem fails fast.
  double subsets = 1.0;
  for (int i = 0; i < n; ++i) subsets = subsets * (m - i) / (i + 1);
  if (subsets > static_cast<double>(max_subsets))
    throw RejectedInput("vertex enumeration: too many constraint subsets for desk-scale enumeration");

  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Eigen::MatrixXd sub(n, n);
  Eigen::VectorXd rhs(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      sub.row(i) = a.row(idx[i]);
      rhs(i) = b(idx[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(rhs);
      const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
      if (((a * x - b).array() <= tol * scale).all()) {
        const bool dup = std::any_of(out.begin(), out.end(), [&](const Eigen::VectorXd& v) {
          return (v - x).cwiseAbs().maxCoeff() <= 1e-9 * scale;
        });
        if (!dup) out.push_back(x);
      }
    }
    int pos = n - 1;
    while (pos >= 0 && idx[pos] == m - n + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < n; ++i) idx[i] = idx[i - 1] + 1;
  }
  if (out.empty()) throw RejectedInput("vertex enumeration: polytope is empty or unbounded");
  return out;
}

}  // namespace dftrl
