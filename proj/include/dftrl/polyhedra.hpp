#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace dftrl {

/// Finds lambda >= 0 with sum(lambda) = 1 and vertices * lambda = point by a
/// phase-one simplex (Bland's rule). `vertices` holds one vertex per column.
/// The result is a basic solution, so at most rows(vertices) + 1 weights are
/// nonzero. Returns nullopt if the point is farther than `tol` from the hull.
std::optional<Eigen::VectorXd> find_convex_combination(const Eigen::MatrixXd& vertices,
                                                       const Eigen::VectorXd& point, double tol = 1e-9);

/// Vertices of {x : A x <= b} by enumerating every full-rank subset of dim
/// active rows. Exponential; desk-scale only. Throws RejectedInput when the
/// number of subsets exceeds `max_subsets`.
std::vector<Eigen::VectorXd> enumerate_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                                double tol = 1e-9, long max_subsets = 2'000'000);

}  // namespace dftrl
