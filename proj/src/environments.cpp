#include "dftrl/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dftrl/counter_rng.hpp"
#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"

namespace dftrl {

using detail::Overloaded;

namespace {

// Standard normal from two keyed uniforms (Box-Muller).
double keyed_normal(std::uint64_t seed, std::uint64_t t, std::uint64_t i) {
  const double u1 = counter_uniform({seed, t, i, 0});
  const double u2 = counter_uniform({seed, t, i, 1});
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
}

int validated_dim(const LossGenerator::Variant& v) {
  return std::visit(
      Overloaded{
          [](const FixedGap& g) {
            for (int i : g.best)
              if (i < 0 || i >= g.base.size()) throw RejectedInput("fixed gap: best index out of range");
            if (g.gap < 0.0) throw RejectedInput("fixed gap: gap must be >= 0");
            return static_cast<int>(g.base.size());
          },
          [](const BlockRepetition& b) {
            if (!b.inner) throw RejectedInput("block repetition: missing inner generator");
            if (b.block < 1) throw RejectedInput("block repetition: block length must be >= 1");
            return b.inner->dim();
          },
          [](const ShiftingPhases& p) {
            if (p.phases.empty() || p.phases.front().start != 1)
              throw RejectedInput("shifting phases: first phase must start at round 1");
            for (std::size_t k = 1; k < p.phases.size(); ++k) {
              if (p.phases[k].start <= p.phases[k - 1].start)
                throw RejectedInput("shifting phases: starts must increase");
              if (p.phases[k].loss.size() != p.phases[0].loss.size())
                throw RejectedInput("shifting phases: phases differ in dimension");
            }
            return static_cast<int>(p.phases[0].loss.size());
          },
          [](const SeededIID& s) {
            if (s.laws.empty()) throw RejectedInput("seeded iid: no coordinates");
            for (const auto& l : s.laws) {
              if (l.kind == CoordinateLaw::Kind::Bernoulli && !(l.mean >= 0.0 && l.mean <= 1.0))
                throw RejectedInput("seeded iid: Bernoulli mean must lie in [0, 1]");
              if (l.kind == CoordinateLaw::Kind::Uniform && !(l.low <= l.high))
                throw RejectedInput("seeded iid: uniform needs low <= high");
            }
            return static_cast<int>(s.laws.size());
          },
          [](const MdpRandomLosses& m) {
            if (m.horizon < 1 || m.states < 1 || m.actions < 1) throw RejectedInput("mdp losses: bad shape");
            return m.horizon * m.states * m.actions;
          },
          [](const LinearDrift& l) {
            if (l.theta.size() < 1) throw RejectedInput("linear drift: empty theta");
            if (l.theta.norm() > 1.0 + 1e-12) throw RejectedInput("linear drift: |theta| must be <= 1");
            if (!(l.noise >= 0.0 && l.noise <= 1.0)) throw RejectedInput("linear drift: noise must lie in [0, 1]");
            return static_cast<int>(l.theta.size());
          }},
      v);
}

}  // namespace

LossGenerator::LossGenerator(Variant v) : variant_(std::move(v)), dim_(validated_dim(variant_)) {
  if (const auto* m = std::get_if<MdpRandomLosses>(&variant_); m && !m->iid) {
    fixed_.resize(dim_);
    for (int i = 0; i < dim_; ++i) fixed_(i) = counter_uniform({m->seed, 0, static_cast<std::uint64_t>(i)});
  }
}

Eigen::VectorXd LossGenerator::losses_for_round(int t) const {
  if (t < 1) throw RejectedInput("loss generator: rounds start at 1");
  const auto tt = static_cast<std::uint64_t>(t);
  return std::visit(
      Overloaded{[&](const FixedGap& g) {
                   Eigen::VectorXd l = g.base;
                   for (int i : g.best) l(i) -= g.gap;
                   return l;
                 },
                 [&](const BlockRepetition& b) { return b.inner->losses_for_round((t - 1) / b.block + 1); },
                 [&](const ShiftingPhases& p) {
                   auto it = std::upper_bound(p.phases.begin(), p.phases.end(), t,
                                              [](int r, const Phase& ph) { return r < ph.start; });
                   return Eigen::VectorXd(std::prev(it)->loss);
                 },
                 [&](const SeededIID& s) {
                   Eigen::VectorXd l(dim_);
                   for (int i = 0; i < dim_; ++i) {
                     const auto& law = s.laws[i];
                     const double u = counter_uniform({s.seed, tt, static_cast<std::uint64_t>(i)});
                     l(i) = law.kind == CoordinateLaw::Kind::Bernoulli ? (u < law.mean ? 1.0 : 0.0)
                                                                       : law.low + (law.high - law.low) * u;
                   }
                   return l;
                 },
                 [&](const MdpRandomLosses& m) {
                   if (!m.iid) return fixed_;
                   Eigen::VectorXd l(dim_);
                   for (int i = 0; i < dim_; ++i) l(i) = counter_uniform({m.seed, tt, static_cast<std::uint64_t>(i)});
                   return l;
                 },
                 [&](const LinearDrift& d) {
                   Eigen::VectorXd z(dim_);
                   for (int i = 0; i < dim_; ++i) z(i) = keyed_normal(d.seed, tt, static_cast<std::uint64_t>(i));
                   const double n = z.norm();
                   if (n > 0.0) z /= n;
                   return Eigen::VectorXd((1.0 - d.noise) * d.theta + d.noise * z);
                 }},
      variant_);
}

LossGenerator make_lower_bound_env(int d, int budget, int dim, int horizon, std::uint64_t seed, double gap) {
  if (d < 1 || horizon < 1) throw RejectedInput("lower-bound environment: need d >= 1 and T >= 1");
  if (budget < 1 || 2 * budget > dim) throw RejectedInput("lower-bound environment: need 1 <= B <= K/2");
  if (!(gap >= 0.0 && gap <= 0.5)) throw RejectedInput("lower-bound environment: gap must lie in [0, 1/2]");
  std::vector<int> idx(dim);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(counter_hash({seed, 0x10B}));
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<CoordinateLaw> laws(dim);
  for (int j = 0; j < budget; ++j) laws[idx[j]].mean = 0.5 - gap;
  auto inner = std::make_shared<const LossGenerator>(SeededIID{laws, seed});
  return LossGenerator(BlockRepetition{inner, d});
}

bool in_range(const Eigen::VectorXd& loss, LossRange range, double tol) {
  switch (range) {
    case LossRange::Signed:
      return loss.size() == 0 || (loss.minCoeff() >= -1.0 - tol && loss.maxCoeff() <= 1.0 + tol);
    case LossRange::Unit:
      return loss.size() == 0 || (loss.minCoeff() >= -tol && loss.maxCoeff() <= 1.0 + tol);
    case LossRange::Ball:
      return loss.norm() <= 1.0 + tol;
  }
  return false;
}

void require_range(const Eigen::VectorXd& loss, LossRange range) {
  if (!loss.allFinite() || !in_range(loss, range)) throw InvariantViolation("loss generator left its range");
}

}  // namespace dftrl
