#include "dftrl/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/polyhedra.hpp"

namespace dftrl {

using detail::Overloaded;

// ---------------------------------------------------------------------------
// OccupancyLayout

OccupancyLayout::OccupancyLayout(int horizon, int states, int actions, int initial_state)
    : h_(horizon), s_(states), a_(actions), s_init_(initial_state) {
  if (horizon < 1 || states < 1 || actions < 1) throw RejectedInput("occupancy layout: H, S, A must be >= 1");
  if (initial_state < 0 || initial_state >= states) throw RejectedInput("occupancy layout: s_init out of range");
}

int OccupancyLayout::packed_index(int h, int s, int a, int next) const {
  if (h == 0) return s == s_init_ ? a * s_ + next : -1;
  return a_ * s_ + ((h - 1) * s_ + s) * a_ * s_ + a * s_ + next;
}

Eigen::VectorXd OccupancyLayout::pack(const Eigen::VectorXd& full) const {
  if (full.size() != full_size()) throw RejectedInput("occupancy layout: dense tensor has wrong size");
  Eigen::VectorXd out(packed_size());
  for (int h = 0; h < h_; ++h)
    for (int s = 0; s < s_; ++s)
      for (int a = 0; a < a_; ++a)
        for (int n = 0; n < s_; ++n) {
          const int p = packed_index(h, s, a, n);
          if (p >= 0) out(p) = full(full_index(h, s, a, n));
        }
  return out;
}

Eigen::VectorXd OccupancyLayout::unpack(const Eigen::VectorXd& packed) const {
  if (packed.size() != packed_size()) throw RejectedInput("occupancy layout: packed vector has wrong size");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(full_size());
  for (int h = 0; h < h_; ++h)
    for (int s = 0; s < s_; ++s)
      for (int a = 0; a < a_; ++a)
        for (int n = 0; n < s_; ++n) {
          const int p = packed_index(h, s, a, n);
          if (p >= 0) out(full_index(h, s, a, n)) = packed(p);
        }
  return out;
}

Eigen::VectorXd occupancy_forward(const OccupancyLayout& layout, const Eigen::VectorXd& policy,
                                  const Eigen::VectorXd& transitions) {
  const int hs = layout.horizon(), ns = layout.states(), na = layout.actions();
  if (policy.size() != hs * ns * na) throw RejectedInput("occupancy: policy tensor has wrong size");
  if (transitions.size() != layout.full_size()) throw RejectedInput("occupancy: transition tensor has wrong size");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(layout.full_size());
  Eigen::VectorXd visit = Eigen::VectorXd::Zero(ns);
  visit(layout.initial_state()) = 1.0;
  for (int h = 0; h < hs; ++h) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(ns);
    for (int s = 0; s < ns; ++s) {
      if (visit(s) == 0.0) continue;
      for (int a = 0; a < na; ++a) {
        const double sa = visit(s) * policy(layout.loss_index(h, s, a));
        for (int n = 0; n < ns; ++n) {
          const int i = layout.full_index(h, s, a, n);
          w(i) = sa * transitions(i);
          next(n) += w(i);
        }
      }
    }
    visit = next;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Occupancy polytope helpers

namespace {

void validate(const OccupancyPolytope& d) {
  const auto& l = d.layout;
  if (l.horizon() < 1) throw RejectedInput("occupancy polytope: empty layout");
  if (d.transitions.size() != l.full_size()) throw RejectedInput("occupancy polytope: transition tensor has wrong size");
  if (!(d.confidence_radius > 0.0)) throw RejectedInput("occupancy polytope: confidence radius must be positive");
  if (!(d.floor > 0.0)) throw RejectedInput("occupancy polytope: floor must be positive");
  if (d.episodes < 1) throw RejectedInput("occupancy polytope: episodes must be >= 1");
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s)
      for (int a = 0; a < l.actions(); ++a) {
        double total = 0.0;
        for (int n = 0; n < l.states(); ++n) {
          const double p = d.transitions(l.full_index(h, s, a, n));
          if (p < 0.0) throw RejectedInput("occupancy polytope: negative transition probability");
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw RejectedInput("occupancy polytope: transition row does not sum to 1");
      }
}

// Sum over s' of w_h(s, a, s') in the dense tensor.
double pair_mass(const OccupancyLayout& l, const Eigen::VectorXd& full, int h, int s, int a) {
  double m = 0.0;
  for (int n = 0; n < l.states(); ++n) m += full(l.full_index(h, s, a, n));
  return m;
}

FeasibilityReport check_occupancy(const OccupancyPolytope& d, const Eigen::VectorXd& packed) {
  const auto& l = d.layout;
  if (packed.size() != l.packed_size()) throw RejectedInput("occupancy polytope: point has wrong size");
  const Eigen::VectorXd full = l.unpack(packed);
  FeasibilityReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  double layer1 = 0.0;
  for (int a = 0; a < l.actions(); ++a) layer1 += pair_mass(l, full, 0, l.initial_state(), a);
  rep.equality_violation = std::abs(layer1 - 1.0);
  for (int h = 1; h < l.horizon(); ++h) {
    for (int s = 0; s < l.states(); ++s) {
      double out = 0.0, in = 0.0;
      for (int a = 0; a < l.actions(); ++a) out += pair_mass(l, full, h, s, a);
      for (int x = 0; x < l.states(); ++x)
        for (int a = 0; a < l.actions(); ++a) in += full(l.full_index(h - 1, x, a, s));
      rep.equality_violation = std::max(rep.equality_violation, std::abs(out - in));
    }
  }
  const double eps = d.confidence_radius;
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s)
      for (int a = 0; a < l.actions(); ++a) {
        if (l.packed_index(h, s, a, 0) < 0) continue;
        const double m = pair_mass(l, full, h, s, a);
        for (int n = 0; n < l.states(); ++n) {
          const int i = l.full_index(h, s, a, n);
          const double p = d.transitions(i);
          rep.min_slack = std::min(rep.min_slack, full(i) - d.floor);
          if (p + eps < 1.0) rep.min_slack = std::min(rep.min_slack, (p + eps) * m - full(i));
          if (p - eps > 0.0) rep.min_slack = std::min(rep.min_slack, full(i) - (p - eps) * m);
        }
      }
  return rep;
}

Formulation formulate_occupancy(const OccupancyPolytope& d) {
  validate(d);
  const auto& l = d.layout;
  const int n = l.packed_size();
  Formulation f;
  f.solver_dim = n;

  const int n_eq = 1 + (l.horizon() - 1) * l.states();
  f.eq_a = Eigen::MatrixXd::Zero(n_eq, n);
  f.eq_b = Eigen::VectorXd::Zero(n_eq);
  for (int a = 0; a < l.actions(); ++a)
    for (int x = 0; x < l.states(); ++x) f.eq_a(0, l.packed_index(0, l.initial_state(), a, x)) = 1.0;
  f.eq_b(0) = 1.0;
  int row = 1;
  for (int h = 1; h < l.horizon(); ++h) {
    for (int s = 0; s < l.states(); ++s, ++row) {
      for (int a = 0; a < l.actions(); ++a)
        for (int x = 0; x < l.states(); ++x) f.eq_a(row, l.packed_index(h, s, a, x)) += 1.0;
      for (int x = 0; x < l.states(); ++x)
        for (int a = 0; a < l.actions(); ++a) {
          const int p = l.packed_index(h - 1, x, a, s);
          if (p >= 0) f.eq_a(row, p) -= 1.0;
        }
    }
  }

  // Band rows are linearized ratio constraints; floor rows are -w <= -floor.
  std::vector<Eigen::VectorXd> g_rows;
  std::vector<double> h_vals;
  const double eps = d.confidence_radius;
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s)
      for (int a = 0; a < l.actions(); ++a) {
        if (l.packed_index(h, s, a, 0) < 0) continue;
        for (int x = 0; x < l.states(); ++x) {
          const int i = l.packed_index(h, s, a, x);
          const double p = d.transitions(l.full_index(h, s, a, x));
          if (p + eps < 1.0) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
            for (int y = 0; y < l.states(); ++y) g(l.packed_index(h, s, a, y)) = -(p + eps);
            g(i) += 1.0;
            g_rows.push_back(std::move(g));
            h_vals.push_back(0.0);
          }
          if (p - eps > 0.0) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
            for (int y = 0; y < l.states(); ++y) g(l.packed_index(h, s, a, y)) = p - eps;
            g(i) -= 1.0;
            g_rows.push_back(std::move(g));
            h_vals.push_back(0.0);
          }
          Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
          g(i) = -1.0;
          g_rows.push_back(std::move(g));
          h_vals.push_back(-d.floor);
        }
      }
  f.ineq_g.resize(static_cast<Eigen::Index>(g_rows.size()), n);
  f.ineq_h.resize(static_cast<Eigen::Index>(h_vals.size()));
  for (std::size_t r = 0; r < g_rows.size(); ++r) {
    f.ineq_g.row(static_cast<Eigen::Index>(r)) = g_rows[r].transpose();
    f.ineq_h(static_cast<Eigen::Index>(r)) = h_vals[r];
  }
  f.start = l.pack(occupancy_witness(d));
  return f;
}

}  // namespace

Eigen::VectorXd occupancy_witness(const OccupancyPolytope& d) {
  validate(d);
  const auto& l = d.layout;
  const double eps = d.confidence_radius;
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(l.horizon() * l.states() * l.actions(), 1.0 / l.actions());
  const Eigen::VectorXd smoothed = ((1.0 - eps) * d.transitions.array() + eps / l.states()).matrix();
  const Eigen::VectorXd base = occupancy_forward(l, uniform, d.transitions);
  const Eigen::VectorXd smooth = occupancy_forward(l, uniform, smoothed);
  const double first = 1.0 / d.episodes;
  for (double weight : {first, std::min(1.0, 2.0 * l.actions() * first), 1.0}) {
    const Eigen::VectorXd w = (1.0 - weight) * base + weight * smooth;
    if (check_occupancy(d, l.pack(w)).min_slack > 0.0) return w;
  }
  throw RejectedInput("occupancy polytope: no strictly feasible witness (floor too large for this T)");
}

// ---------------------------------------------------------------------------
// DomainSpec

DomainSpec::DomainSpec(CappedSimplexHull d) : variant_(d) {
  if (d.dim < 1) throw RejectedInput("capped simplex: dimension must be positive");
  if (!(d.budget > 0.0) || d.budget > d.dim) throw RejectedInput("capped simplex: budget must lie in (0, K]");
}

DomainSpec::DomainSpec(VertexHull d) : variant_(std::move(d)) {
  const auto& v = std::get<VertexHull>(variant_).vertices;
  if (v.rows() < 1 || v.cols() < 1) throw RejectedInput("vertex hull: empty vertex set");
  if (!((v.array() == 0.0) || (v.array() == 1.0)).all()) throw RejectedInput("vertex hull: vertices must be binary");
  if ((v.rowwise().maxCoeff().array() == 0.0).any())
    throw RejectedInput("vertex hull: every coordinate must be covered by some vertex");
}

DomainSpec::DomainSpec(OccupancyPolytope d) : variant_(std::move(d)) {
  validate(std::get<OccupancyPolytope>(variant_));
}

DomainSpec::DomainSpec(Ball d) : variant_(d) {
  if (d.dim < 1 || !(d.radius > 0.0)) throw RejectedInput("ball: dimension and radius must be positive");
}

DomainSpec::DomainSpec(Polytope d) : variant_(std::move(d)) {
  const auto& p = std::get<Polytope>(variant_);
  if (p.a.rows() != p.b.size() || p.a.cols() < 1) throw RejectedInput("polytope: malformed constraints");
}

int DomainSpec::dim() const {
  return std::visit(Overloaded{[](const CappedSimplexHull& d) { return d.dim; },
                               [](const VertexHull& d) { return static_cast<int>(d.vertices.rows()); },
                               [](const OccupancyPolytope& d) { return d.layout.packed_size(); },
                               [](const Ball& d) { return d.dim; },
                               [](const Polytope& d) { return static_cast<int>(d.a.cols()); }},
                    variant_);
}

Formulation DomainSpec::formulate() const {
  return std::visit(
      Overloaded{
          [](const CappedSimplexHull& d) {
            Formulation f;
            f.solver_dim = d.dim;
            f.eq_a = Eigen::MatrixXd::Ones(1, d.dim);
            f.eq_b = Eigen::VectorXd::Constant(1, d.budget);
            if (d.budget > 1.0) {
              f.ineq_g = Eigen::MatrixXd::Identity(d.dim, d.dim);
              f.ineq_h = Eigen::VectorXd::Ones(d.dim);
            } else {
              f.ineq_g.resize(0, d.dim);
              f.ineq_h.resize(0);
            }
            f.start = Eigen::VectorXd::Constant(d.dim, d.budget / d.dim);
            f.single_point = d.budget == static_cast<double>(d.dim);
            return f;
          },
          [](const VertexHull& d) {
            const int m = static_cast<int>(d.vertices.cols());
            Formulation f;
            f.solver_dim = m;
            f.lift = d.vertices;
            f.eq_a = Eigen::MatrixXd::Ones(1, m);
            f.eq_b = Eigen::VectorXd::Ones(1);
            f.ineq_g = -Eigen::MatrixXd::Identity(m, m);
            f.ineq_h = Eigen::VectorXd::Zero(m);
            f.start = Eigen::VectorXd::Constant(m, 1.0 / m);
            f.single_point = m == 1;
            return f;
          },
          [](const OccupancyPolytope& d) { return formulate_occupancy(d); },
          [](const Ball& d) {
            Formulation f;
            f.solver_dim = d.dim;
            f.eq_a.resize(0, d.dim);
            f.eq_b.resize(0);
            f.ineq_g.resize(0, d.dim);
            f.ineq_h.resize(0);
            f.start = Eigen::VectorXd::Zero(d.dim);
            return f;
          },
          [](const Polytope& d) {
            const int n = static_cast<int>(d.a.cols());
            Formulation f;
            f.solver_dim = n;
            f.eq_a.resize(0, n);
            f.eq_b.resize(0);
            f.ineq_g.resize(0, n);
            f.ineq_h.resize(0);
            const auto verts = enumerate_vertices(d.a, d.b);
            f.start = Eigen::VectorXd::Zero(n);
            for (const auto& v : verts) f.start += v;
            f.start /= static_cast<double>(verts.size());
            if (!((d.b - d.a * f.start).array() > 0.0).all())
              throw RejectedInput("polytope: vertex centroid is not interior (domain has empty interior)");
            return f;
          }},
      variant_);
}

FeasibilityReport DomainSpec::check(const Eigen::VectorXd& w) const {
  if (w.size() != dim()) throw RejectedInput("domain check: dimension mismatch");
  return std::visit(
      Overloaded{[&](const CappedSimplexHull& d) {
                   FeasibilityReport r;
                   r.equality_violation = std::abs(w.sum() - d.budget);
                   r.min_slack = std::min(w.minCoeff(), (1.0 - w.array()).minCoeff());
                   return r;
                 },
                 [&](const VertexHull& d) {
                   FeasibilityReport r;
                   const auto lambda = find_convex_combination(d.vertices, w);
                   r.equality_violation = lambda ? 0.0 : std::numeric_limits<double>::infinity();
                   r.min_slack = w.minCoeff();
                   return r;
                 },
                 [&](const OccupancyPolytope& d) { return check_occupancy(d, w); },
                 [&](const Ball& d) {
                   FeasibilityReport r;
                   r.min_slack = d.radius - w.norm();
                   return r;
                 },
                 [&](const Polytope& d) {
                   FeasibilityReport r;
                   r.min_slack = (d.b - d.a * w).minCoeff();
                   return r;
                 }},
      variant_);
}

}  // namespace dftrl
