#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "dftrl/barrier.hpp"
#include "dftrl/domain.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/ftrl.hpp"
#include "dftrl/matrix_functions.hpp"
#include "dftrl/regularizer.hpp"
#include "oracles.hpp"

using namespace dftrl;
using doctest::Approx;

TEST_CASE("symmetric roots") {
  CHECK(sym_sqrt(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  Eigen::MatrixXd d = Eigen::Vector2d(4.0, 9.0).asDiagonal();
  const Eigen::MatrixXd r = sym_sqrt(d);
  CHECK(r(0, 0) == Approx(2.0));
  CHECK(r(1, 1) == Approx(3.0));
  CHECK(std::abs(r(0, 1)) < 1e-14);

  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd m = oracle::random_pd(5, rng);
    const SymRoots roots = sym_roots(m);
    CHECK((roots.sqrt * roots.sqrt - m).norm() <= 1e-9 * m.norm());
    CHECK((roots.inv_sqrt * roots.sqrt - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-9);
  }
  Eigen::MatrixXd bad = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  CHECK_THROWS_AS(sym_sqrt(bad), NumericalError);
}

TEST_CASE("regularizer values") {
  Regularizer ent(EntropyLogBarrier{1.0, 1.0}, 2);
  CHECK(ent.value(Eigen::Vector2d(1.0, 1.0)) == Approx(0.0));
  CHECK(ent.value(Eigen::Vector2d(0.5, 0.5)) == Approx(0.693147).epsilon(1e-6));
  const Eigen::VectorXd diag = ent.hessian_diagonal(Eigen::Vector2d(0.5, 0.5));
  CHECK(diag(0) == Approx(6.0));
  CHECK(diag(1) == Approx(6.0));
  CHECK_THROWS_AS(ent.value(Eigen::Vector2d(0.5, 0.0)), RejectedInput);

  Regularizer ball(QuadraticPlusBarrier{1.0, 1.0, BarrierSpec(BallBarrier{2, 1.0})});
  CHECK(ball.value(Eigen::Vector2d::Zero()) == Approx(0.0));
  const BarrierSpec psi(BallBarrier{2, 1.0});
  CHECK(psi.hessian(Eigen::Vector2d::Zero()).isApprox(2.0 * Eigen::MatrixXd::Identity(2, 2)));
  CHECK_THROWS_AS(ball.value(Eigen::Vector2d(1.0, 0.0)), RejectedInput);
}

TEST_CASE("finite differences agree with analytic derivatives") {
  std::mt19937_64 rng(11);
  for (const auto& reg : oracle::regularizer_zoo()) {
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::VectorXd w = oracle::random_interior(reg, rng);
      CHECK(oracle::gradient_fd_error(reg, w) < 1e-6);
      CHECK(oracle::hessian_fd_error(reg, w) < 1e-6);
    }
  }
}

TEST_CASE("barriers are self-concordant") {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd a(4, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1;
  const std::vector<BarrierSpec> barriers{BarrierSpec(BallBarrier{3, 2.0}),
                                          BarrierSpec(PolytopeLogBarrier{a, Eigen::VectorXd::Ones(4)})};
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const auto& psi : barriers) {
    for (int rep = 0; rep < 200; ++rep) {
      Eigen::VectorXd w(psi.dim()), h(psi.dim());
      do {
        for (int i = 0; i < psi.dim(); ++i) w(i) = u(rng) * 1.5;
      } while (!psi.contains(w));
      for (int i = 0; i < psi.dim(); ++i) h(i) = n(rng);
      const DirectionalDerivatives d = psi.directional(w, h);
      CHECK(std::abs(d.third) <= 2.0 * std::pow(d.second, 1.5) * (1.0 + 1e-6));
      CHECK(std::abs(d.first) <= std::sqrt(psi.nu() * d.second) * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("ball barrier growth on the shrunk ball") {
  std::mt19937_64 rng(8);
  const BarrierSpec psi(BallBarrier{3, 1.0});
  for (double delta : {0.1, 1.0 / std::sqrt(10000.0)}) {
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd w = oracle::uniform_in_ball(3, 1.0 / (1.0 + delta), rng);
      CHECK(psi.value(w) - psi.value(Eigen::VectorXd::Zero(3)) <= std::log((1.0 + delta) / delta) + 1e-12);
    }
  }
}

TEST_CASE("local norms and Dikin membership") {
  const LocalNormContext ctx(Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d(Eigen::Vector2d(6.0, 6.0).asDiagonal()));
  CHECK(ctx.local_norm(Eigen::Vector2d(1.0, 1.0)) == Approx(std::sqrt(2.0 / 6.0)));
  CHECK(ctx.local_norm(Eigen::Vector2d::Zero()) == 0.0);

  const LocalNormContext id(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  CHECK(id.local_norm_dual(Eigen::Vector2d(0.3, 0.4)) == Approx(0.5));
  CHECK(id.dikin_contains(Eigen::Vector2d::Zero(), 0.0));
  CHECK_FALSE(id.dikin_contains(Eigen::Vector2d(0.6, 0.0), 0.5));
  CHECK(id.dikin_contains(Eigen::Vector2d(0.5, 0.0), 0.5));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::MatrixXd h = oracle::random_pd(4, rng);
    const LocalNormContext c(Eigen::VectorXd::Zero(4), h);
    CHECK((c.reconstructed_hessian() - h).norm() <= 1e-10 * h.norm());
    Eigen::VectorXd l(4), x(4);
    for (int i = 0; i < 4; ++i) {
      l(i) = n(rng);
      x(i) = n(rng);
    }
    CHECK(c.local_norm(l) * c.local_norm_dual(x) >= std::abs(l.dot(x)) * (1.0 - 1e-12));
  }
}

TEST_CASE("ftrl on the capped simplex") {
  const Regularizer reg(EntropyLogBarrier{1.0, 0.5}, 4);
  const Iterate it = solve_ftrl(Eigen::VectorXd::Zero(4), reg, DomainSpec(CappedSimplexHull{4, 2.0}));
  for (int i = 0; i < 4; ++i) CHECK(it.w(i) == Approx(0.5).epsilon(1e-9));
  CHECK(it.kkt_residual <= 1e-9);

  const Regularizer reg2(EntropyLogBarrier{1.0, 0.9}, 2);
  const Iterate it2 = solve_ftrl(Eigen::Vector2d(10.0, 0.0), reg2, DomainSpec(CappedSimplexHull{2, 1.0}));
  CHECK(it2.w(0) < it2.w(1));
  CHECK(std::abs(it2.w.sum() - 1.0) < 1e-9);

  const Iterate full = solve_ftrl(Eigen::VectorXd::Ones(3), Regularizer(EntropyLogBarrier{1.0, 0.5}, 3),
                                  DomainSpec(CappedSimplexHull{3, 3.0}));
  CHECK(full.w.isApprox(Eigen::VectorXd::Ones(3)));
  CHECK(full.newton_steps == 0);
}

TEST_CASE("ftrl matches the grid oracle and is monotone in the loss") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> lu(-20.0, 20.0), eu(0.05, 2.0), gu(0.05, 0.95);
  for (int rep = 0; rep < 10; ++rep) {
    const double eta = eu(rng), gamma = gu(rng);
    const Eigen::Vector2d l(lu(rng), lu(rng));
    const Regularizer reg(EntropyLogBarrier{eta, gamma}, 2);
    const DomainSpec dom(CappedSimplexHull{2, 1.0});
    const Iterate it = solve_ftrl(l, reg, dom);
    CHECK(std::abs(it.w(0) - oracle::grid_argmin_simplex2(l, eta, gamma, 1e-4)) < 5e-3);
    const Iterate up = solve_ftrl(l + Eigen::Vector2d(1.0, 0.0), reg, dom);
    CHECK(up.w(0) <= it.w(0) + 1e-12);
  }
}

TEST_CASE("ftrl warm starts reach the same point") {
  const Regularizer reg(EntropyLogBarrier{0.3, 0.2}, 5);
  const FtrlProblem problem(reg, DomainSpec(CappedSimplexHull{5, 2.0}));
  Eigen::VectorXd l(5);
  l << 1.0, -2.0, 0.5, 3.0, 0.0;
  const Iterate cold = problem.solve(l);
  const Iterate warm = problem.solve(l * 1.01, &cold);
  const Iterate cold2 = problem.solve(l * 1.01);
  CHECK((warm.w - cold2.w).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(warm.newton_steps <= cold2.newton_steps);
}

TEST_CASE("ftrl stability in the local norm") {
  // |w(L) - w(L')|*_{R,x} <= 8 |L - L'|_{R,x} for nearby solutions.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const Regularizer reg(EntropyLogBarrier{0.5, 0.25}, 4);
  const DomainSpec dom(CappedSimplexHull{4, 2.0});
  int checked = 0;
  for (int rep = 0; rep < 40; ++rep) {
    Eigen::VectorXd l(4), dl(4);
    for (int i = 0; i < 4; ++i) {
      l(i) = 3.0 * n(rng);
      dl(i) = 0.05 * n(rng);
    }
    const Iterate a = solve_ftrl(l, reg, dom), b = solve_ftrl(l + dl, reg, dom);
    const LocalNormContext ctx(reg, a.w);
    if (!ctx.dikin_contains(b.w, 0.5)) continue;
    ++checked;
    CHECK(ctx.local_norm_dual(b.w - a.w) <= 8.0 * ctx.local_norm(dl));
  }
  CHECK(checked > 20);
}

TEST_CASE("hessian sandwich diagnostic") {
  std::mt19937_64 rng(9);
  const Regularizer reg(EntropyLogBarrier{0.01, 1.0 / (64.0 * 64.0 * 2.0 * 4.0)}, 4);
  const Eigen::Vector4d w(0.2, 0.6, 0.7, 0.5);
  const SandwichReport zero = hessian_sandwich_check(reg, w, 0.0, 10, rng);
  CHECK(zero.worst_factor == Approx(1.0));
  const SandwichReport r = hessian_sandwich_check(reg, w, 0.5, 1000, rng);
  CHECK(r.worst_factor <= 4.0);
  CHECK(r.min_coord_ratio >= 0.5);
  CHECK(r.max_coord_ratio <= 2.0);

  const Regularizer ball(QuadraticPlusBarrier{0.1, 0.01, BarrierSpec(BallBarrier{3, 1.0})});
  const SandwichReport rb = hessian_sandwich_check(ball, Eigen::Vector3d(0.3, -0.2, 0.1), 0.5, 200, rng);
  CHECK(rb.worst_factor <= 4.0);
}
