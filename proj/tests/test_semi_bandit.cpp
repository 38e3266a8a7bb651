#include <doctest.h>

#include <cmath>
#include <random>

#include "dftrl/errors.hpp"
#include "dftrl/semi_bandit.hpp"
#include "oracles.hpp"

using namespace dftrl;
using doctest::Approx;

namespace {

Eigen::VectorXd random_capped(int k, int b, std::mt19937_64& rng) {
  // Interior point of the capped simplex: mix a random vertex set uniformly.
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(k, static_cast<double>(b) / k);
  for (int rep = 0; rep < 20; ++rep) {
    const int i = static_cast<int>(rng() % k), j = static_cast<int>(rng() % k);
    if (i == j) continue;
    const double shift = (u(rng) - 0.5) * std::min({w(i), 1.0 - w(i), w(j), 1.0 - w(j)});
    w(i) += shift;
    w(j) -= shift;
  }
  return w;
}

}  // namespace

TEST_CASE("tuning reproduces the theorem constants") {
  CHECK(tune_semibandit(2, 4, 100, 0, 1).gamma == Approx(1.0 / 32768.0));
  CHECK(tune_semibandit(2, 4, 100, 0, 1).eta == Approx(1.0 / 512.0));
  const SemiBanditParams big = tune_semibandit(2, 4, 100, 0, 500);
  CHECK(big.eta == Approx(1.0 / (256.0 * 2.0 * 500.0 * 500.0)));

  const SemiBanditParams p = tune_semibandit(2, 4, 10000, 100000, 10);
  const double b = 2, k = 4, t = 1e4, d = 1e5, dm = 10;
  const double expected = 12.0 * std::sqrt(b * (k * t + b * d) * std::log(k / b)) +
                          4096.0 * b * (1 + dm) * (1 + dm) * k * std::log(t) + 512.0 * b * b * dm * dm * std::log(k / b);
  CHECK(theorem_bound_comb(p) == Approx(expected).epsilon(1e-12));
  CHECK(theorem_bound_comb(tune_semibandit(2, 4, 20000, 100000, 10)) > theorem_bound_comb(p));
}

TEST_CASE("systematic sampler has exact marginals") {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 30; ++rep) {
    const int k = 2 + static_cast<int>(rng() % 5), b = 1 + static_cast<int>(rng() % (k - 1));
    const Eigen::VectorXd w = random_capped(k, b, rng);
    const CombActionSet set(MSets{k, b});
    const auto support = decomposition_support(w, set);
    double total = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
    for (const auto& s : support) {
      CHECK(s.action.sum() == Approx(b));
      total += s.prob;
      mean += s.prob * s.action;
    }
    CHECK(total == Approx(1.0).epsilon(1e-14));
    CHECK((mean - w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sampler empirical mean") {
  std::mt19937_64 rng(2);
  const CombActionSet set(MSets{4, 2});
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(4, 0.5);
  const int n = 1'000'000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < n; ++i) sum += sample_action(w, set, rng);
  const double se = std::sqrt(0.25 / n);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(sum(i) / n - 0.5) <= 3.0 * se);
}

TEST_CASE("single-coordinate and vertex cases") {
  std::mt19937_64 rng(3);
  const CombActionSet one(MSets{3, 1});
  const Eigen::Vector3d w(0.2, 0.5, 0.3);
  for (const auto& s : decomposition_support(w, one)) {
    CHECK(s.action.sum() == 1.0);
    Eigen::Index i;
    s.action.maxCoeff(&i);
    CHECK(s.prob == Approx(w(i)));
  }
  const Eigen::Vector3d vertex(0.0, 1.0, 0.0);
  for (int r = 0; r < 20; ++r) CHECK(sample_action(vertex, one, rng) == vertex);

  Eigen::MatrixXd verts(4, 3);
  verts << 1, 0, 1, 1, 1, 0, 0, 1, 1, 0, 0, 0;
  const CombActionSet explicit_set(ExplicitVertices{verts});
  const Eigen::VectorXd mid = verts.rowwise().mean();
  const auto support = decomposition_support(mid, explicit_set);
  CHECK(support.size() <= 5);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  for (const auto& s : support) mean += s.prob * s.action;
  CHECK((mean - mid).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(decomposition_support(Eigen::Vector4d(1, 1, 1, 1), explicit_set), RejectedInput);
}

TEST_CASE("importance-weighted estimate") {
  const Eigen::VectorXd est = iw_estimate(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, 0.0), Eigen::Vector2d(0.5, 0.5));
  CHECK(est(0) == Approx(1.0));
  CHECK(est(1) == 0.0);
  CHECK(iw_estimate(Eigen::Vector2d(1, 1), Eigen::Vector2d::Zero(), Eigen::Vector2d(0.5, 0.5)).isZero());
  CHECK_THROWS_AS(iw_estimate(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0.0, 1.0)), NumericalError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 3 + static_cast<int>(rng() % 4), b = 1 + static_cast<int>(rng() % 3);
    const Eigen::VectorXd w = random_capped(k, b, rng);
    Eigen::VectorXd loss(k);
    for (int i = 0; i < k; ++i) loss(i) = u(rng);
    const Eigen::VectorXd mean = oracle::exact_semibandit_mean(w, loss, CombActionSet(MSets{k, b}));
    CHECK((mean - loss).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("estimate second moment in the local norm") {
  // E[|est|^2_{R,w}] <= eta K for losses in [-1, 1].
  std::mt19937_64 rng(6);
  const SemiBanditParams p = tune_semibandit(2, 5, 1000, 2000, 3);
  const Regularizer reg(EntropyLogBarrier{p.eta, p.gamma}, 5);
  const CombActionSet set(MSets{5, 2});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd w = random_capped(5, 2, rng);
    Eigen::VectorXd loss(5);
    for (int i = 0; i < 5; ++i) loss(i) = u(rng);
    const LocalNormContext ctx(reg, w);
    double second = 0.0;
    for (const auto& s : decomposition_support(w, set)) {
      const double n = ctx.local_norm(iw_estimate(s.action, s.action.cwiseProduct(loss), w));
      second += s.prob * n * n;
    }
    CHECK(second <= p.eta * 5 * (1.0 + 1e-9));
    CHECK(ctx.local_norm(loss) <= std::sqrt(p.eta * 2) + 1e-12);
  }
}

TEST_CASE("best fixed action") {
  const CombActionSet set(MSets{4, 2});
  CHECK(best_in_hindsight_comb(Eigen::Vector4d(3, 1, 2, 0), set) == Eigen::Vector4d(0, 1, 0, 1));
  CHECK(best_in_hindsight_comb(Eigen::Vector4d::Zero(), set) == Eigen::Vector4d(1, 1, 0, 0));
  Eigen::MatrixXd single(3, 1);
  single << 1, 0, 1;
  CHECK(best_in_hindsight_comb(Eigen::Vector3d(5, 5, 5), CombActionSet(ExplicitVertices{single})) ==
        Eigen::Vector3d(1, 0, 1));
}

TEST_CASE("learner rounds") {
  const CombActionSet set(MSets{4, 2});
  const SemiBanditParams p = tune_semibandit(2, 4, 200, 0, 1);
  SemiBanditLearner a(set, p), b(set, p);
  const Iterate& first = a.prepare_round(1);
  for (int i = 0; i < 4; ++i) CHECK(first.w(i) == Approx(0.5));
  b.prepare_round(1);
  std::mt19937_64 ra(9), rb(9);
  const Eigen::Vector4d loss(0.9, -0.5, 0.1, 0.3);
  for (int t = 1; t <= 50; ++t) {
    if (t > 1) {
      a.prepare_round(t);
      b.prepare_round(t);
    }
    const Eigen::VectorXd xa = a.play(ra), xb = b.play(rb);
    CHECK(xa == xb);
    a.receive(t, xa.cwiseProduct(loss));
    b.receive(t, xb.cwiseProduct(loss));
  }
  CHECK(a.iterate().w == b.iterate().w);
  CHECK(a.invariants().clean());
  CHECK_THROWS_AS(a.receive(999, Eigen::Vector4d::Zero()), RejectedInput);
}

TEST_CASE("zero delay matches plain FTRL on the estimates") {
  const CombActionSet set(MSets{3, 1});
  const SemiBanditParams p = tune_semibandit(1, 3, 100, 0, 1);
  SemiBanditLearner learner(set, p);
  const Regularizer reg(EntropyLogBarrier{p.eta, p.gamma}, 3);
  std::mt19937_64 rng(10);
  Eigen::VectorXd cumulative = Eigen::VectorXd::Zero(3);
  const Eigen::Vector3d loss(0.2, 0.7, -0.4);
  for (int t = 1; t <= 20; ++t) {
    const Iterate& it = learner.prepare_round(t);
    const Iterate ref = solve_ftrl(cumulative, reg, DomainSpec(CappedSimplexHull{3, 1.0}));
    CHECK((it.w - ref.w).cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::VectorXd a = learner.play(rng);
    cumulative += learner.receive(t, a.cwiseProduct(loss));
  }
}
