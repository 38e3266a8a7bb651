#include "dftrl/barrier.hpp"

#include <cmath>
#include <string>

#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"

namespace dftrl {

namespace {

using detail::Overloaded;

double ball_slack(const BallBarrier& ball, const Eigen::VectorXd& w) {
  return 1.0 - w.squaredNorm() / (ball.radius * ball.radius);
}

}  // namespace

BarrierSpec::BarrierSpec(BallBarrier ball) : variant_(ball) {
  if (ball.dim < 1) throw RejectedInput("ball barrier: dimension must be positive");
  if (!(ball.radius > 0.0)) throw RejectedInput("ball barrier: radius must be positive");
}

BarrierSpec::BarrierSpec(PolytopeLogBarrier polytope) : variant_(std::move(polytope)) {
  const auto& p = std::get<PolytopeLogBarrier>(variant_);
  if (p.a.rows() == 0 || p.a.cols() == 0) throw RejectedInput("polytope barrier: empty constraint matrix");
  if (p.a.rows() != p.b.size()) throw RejectedInput("polytope barrier: A and b row counts differ");
}

int BarrierSpec::dim() const {
  return std::visit(Overloaded{[](const BallBarrier& b) { return b.dim; },
                               [](const PolytopeLogBarrier& p) { return static_cast<int>(p.a.cols()); }},
                    variant_);
}

double BarrierSpec::nu() const {
  return std::visit(Overloaded{[](const BallBarrier&) { return 1.0; },
                               [](const PolytopeLogBarrier& p) { return static_cast<double>(p.a.rows()); }},
                    variant_);
}

bool BarrierSpec::contains(const Eigen::VectorXd& w) const {
  if (w.size() != dim() || !w.allFinite()) return false;
  return std::visit(Overloaded{[&](const BallBarrier& b) { return ball_slack(b, w) > 0.0; },
                               [&](const PolytopeLogBarrier& p) {
                                 return ((p.b - p.a * w).array() > 0.0).all();
                               }},
                    variant_);
}

void BarrierSpec::require_interior(const Eigen::VectorXd& w) const {
  if (w.size() != dim()) throw RejectedInput("barrier: dimension mismatch");
  if (!contains(w)) throw RejectedInput("barrier: point is not strictly inside the barrier domain");
}

double BarrierSpec::value(const Eigen::VectorXd& w) const {
  require_interior(w);
  return std::visit(Overloaded{[&](const BallBarrier& b) { return -std::log1p(-w.squaredNorm() / (b.radius * b.radius)); },
                               [&](const PolytopeLogBarrier& p) {
                                 return -(p.b - p.a * w).array().log().sum();
                               }},
                    variant_);
}

Eigen::VectorXd BarrierSpec::gradient(const Eigen::VectorXd& w) const {
  require_interior(w);
  return std::visit(Overloaded{[&](const BallBarrier& b) -> Eigen::VectorXd {
                                 const double r2 = b.radius * b.radius;
                                 return (2.0 / (r2 * ball_slack(b, w))) * w;
                               },
                               [&](const PolytopeLogBarrier& p) -> Eigen::VectorXd {
                                 const Eigen::VectorXd inv = (p.b - p.a * w).cwiseInverse();
                                 return p.a.transpose() * inv;
                               }},
                    variant_);
}

Eigen::MatrixXd BarrierSpec::hessian(const Eigen::VectorXd& w) const {
  require_interior(w);
  return std::visit(Overloaded{[&](const BallBarrier& b) -> Eigen::MatrixXd {
                                 const double r2 = b.radius * b.radius;
                                 const double q = ball_slack(b, w);
                                 Eigen::MatrixXd h = (4.0 / (r2 * r2 * q * q)) * (w * w.transpose());
                                 h.diagonal().array() += 2.0 / (r2 * q);
                                 return h;
                               },
                               [&](const PolytopeLogBarrier& p) -> Eigen::MatrixXd {
                                 const Eigen::VectorXd inv = (p.b - p.a * w).cwiseInverse();
                                 return p.a.transpose() * inv.array().square().matrix().asDiagonal() * p.a;
                               }},
                    variant_);
}

DirectionalDerivatives BarrierSpec::directional(const Eigen::VectorXd& w, const Eigen::VectorXd& h) const {
  require_interior(w);
  if (h.size() != w.size()) throw RejectedInput("barrier: direction dimension mismatch");
  return std::visit(
      Overloaded{[&](const BallBarrier& b) {
                   // q(t) = 1 - |w + t h|^2 / B^2 is a concave quadratic in t.
                   const double r2 = b.radius * b.radius;
                   const double q = ball_slack(b, w);
                   const double q1 = -2.0 * w.dot(h) / r2;
                   const double q2 = -2.0 * h.squaredNorm() / r2;
                   DirectionalDerivatives d;
                   d.first = -q1 / q;
                   d.second = -q2 / q + q1 * q1 / (q * q);
                   d.third = 3.0 * q1 * q2 / (q * q) - 2.0 * q1 * q1 * q1 / (q * q * q);
                   return d;
                 },
                 [&](const PolytopeLogBarrier& p) {
                   const Eigen::ArrayXd ratio = (p.a * h).array() / (p.b - p.a * w).array();
                   DirectionalDerivatives d;
                   d.first = ratio.sum();
                   d.second = ratio.square().sum();
                   d.third = 2.0 * ratio.cube().sum();
                   return d;
                 }},
      variant_);
}

}  // namespace dftrl
