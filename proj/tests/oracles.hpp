#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "dftrl/mdp.hpp"
#include "dftrl/regularizer.hpp"
#include "dftrl/semi_bandit.hpp"

namespace oracle {

inline Eigen::MatrixXd random_pd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::VectorXd uniform_in_ball(int k, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(k);
  for (int i = 0; i < k; ++i) v(i) = g(rng);
  return v.normalized() * radius * std::pow(u(rng), 1.0 / k);
}

inline std::vector<dftrl::Regularizer> regularizer_zoo() {
  using namespace dftrl;
  Eigen::MatrixXd box(6, 3);
  box << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  return {Regularizer(EntropyLogBarrier{1.0, 0.5}, 4),
          Regularizer(EntropyLogBarrier{0.01, 1e-4}, 5),
          Regularizer(QuadraticPlusBarrier{0.5, 0.1, BarrierSpec(BallBarrier{3, 1.0})}),
          Regularizer(QuadraticPlusBarrier{1e-3, 1e-5, BarrierSpec(BallBarrier{4, 2.0})}),
          Regularizer(QuadraticPlusBarrier{0.2, 0.3, BarrierSpec(PolytopeLogBarrier{box, Eigen::VectorXd::Ones(6)})})};
}

/// Interior point with some margin: positive coordinates for separable
/// regularizers, otherwise a point whose 1.25x dilation is still inside.
inline Eigen::VectorXd random_interior(const dftrl::Regularizer& reg, std::mt19937_64& rng) {
  const int k = reg.dim();
  Eigen::VectorXd w(k);
  if (reg.is_separable()) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int i = 0; i < k; ++i) w(i) = u(rng);
    return w;
  }
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  do {
    for (int i = 0; i < k; ++i) w(i) = u(rng);
  } while (!reg.in_domain(1.25 * w));
  return w;
}

inline double step_for(double x) { return 1e-5 * std::max(std::abs(x), 1e-2); }

/// max_i |g_i - fd_i| / max(1, |g|_inf), central differences of the value.
inline double gradient_fd_error(const dftrl::Regularizer& reg, const Eigen::VectorXd& w) {
  const Eigen::VectorXd g = reg.gradient(w);
  double worst = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const double h = step_for(w(i));
    Eigen::VectorXd p = w, m = w;
    p(i) += h;
    m(i) -= h;
    const double fd = (reg.value(p) - reg.value(m)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g(i)));
  }
  return worst / std::max(1.0, g.cwiseAbs().maxCoeff());
}

/// Same for the Hessian, by central differences of the gradient.
inline double hessian_fd_error(const dftrl::Regularizer& reg, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd h = reg.hessian(w);
  double worst = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    const double s = step_for(w(i));
    Eigen::VectorXd p = w, m = w;
    p(i) += s;
    m(i) -= s;
    const Eigen::VectorXd col = (reg.gradient(p) - reg.gradient(m)) / (2.0 * s);
    worst = std::max(worst, (col - h.col(i)).cwiseAbs().maxCoeff());
  }
  return worst / std::max(1.0, h.cwiseAbs().maxCoeff());
}

/// argmin over w = (x, 1 - x) on the grid x = step, 2 step, ... of
/// l^T w + sum w log w / eta - log w / gamma.
inline double grid_argmin_simplex2(const Eigen::Vector2d& l, double eta, double gamma, double step) {
  double best_x = 0.5, best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::round(1.0 / step));
  for (int i = 1; i < n; ++i) {
    const double x = i * step, y = 1.0 - x;
    const double f = l(0) * x + l(1) * y + (x * std::log(x) + y * std::log(y)) / eta - (std::log(x) + std::log(y)) / gamma;
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  return best_x;
}

/// sum over the decomposition support of p(a) * est(a).
inline Eigen::VectorXd exact_semibandit_mean(const Eigen::VectorXd& w, const Eigen::VectorXd& loss,
                                             const dftrl::CombActionSet& actions) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(w.size());
  for (const auto& s : dftrl::decomposition_support(w, actions))
    mean += s.prob * dftrl::iw_estimate(s.action, s.action.cwiseProduct(loss), w);
  return mean;
}

/// Visits every (s_1, a_1, ..., s_H, a_H) path with its probability.
inline void for_each_path(const dftrl::MdpSpec& spec, const Eigen::VectorXd& policy, const Eigen::VectorXd& transitions,
                          const std::function<void(const std::vector<int>&, const std::vector<int>&, double)>& visit) {
  const dftrl::OccupancyLayout l = spec.layout();
  std::vector<int> states(spec.horizon), actions(spec.horizon);
  std::function<void(int, int, double)> rec = [&](int h, int s, double prob) {
    if (prob == 0.0) return;
    states[h] = s;
    for (int a = 0; a < spec.actions; ++a) {
      const double pa = prob * policy(l.loss_index(h, s, a));
      if (pa == 0.0) continue;
      actions[h] = a;
      if (h + 1 == spec.horizon) {
        visit(states, actions, pa);
      } else {
        for (int n = 0; n < spec.states; ++n) rec(h + 1, n, pa * transitions(l.full_index(h, s, a, n)));
      }
    }
  };
  rec(0, spec.initial_state, 1.0);
}

/// w_h(s, a) by summing path probabilities.
inline Eigen::VectorXd path_occupancy(const dftrl::MdpSpec& spec, const Eigen::VectorXd& policy,
                                      const Eigen::VectorXd& transitions) {
  const dftrl::OccupancyLayout l = spec.layout();
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(l.loss_size());
  for_each_path(spec, policy, transitions, [&](const std::vector<int>& s, const std::vector<int>& a, double p) {
    for (int h = 0; h < spec.horizon; ++h) occ(l.loss_index(h, s[h], a[h])) += p;
  });
  return occ;
}

/// E[est] over the trajectory distribution of the policy under the true p.
inline Eigen::VectorXd exact_mdp_estimate_mean(const dftrl::MdpSpec& spec, const Eigen::VectorXd& policy,
                                               const Eigen::VectorXd& loss, const Eigen::VectorXd& upper) {
  const dftrl::OccupancyLayout l = spec.layout();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(l.loss_size());
  for_each_path(spec, policy, spec.transitions, [&](const std::vector<int>& s, const std::vector<int>& a, double p) {
    dftrl::Trajectory traj;
    traj.states = s;
    traj.actions = a;
    for (int h = 0; h < spec.horizon; ++h) traj.losses.push_back(loss(l.loss_index(h, s[h], a[h])));
    mean += p * dftrl::mdp_estimate(l, traj, upper);
  });
  return mean;
}

/// min over all deterministic policies (A^{SH} of them) of the value.
inline double brute_force_best_value(const dftrl::MdpSpec& spec, const Eigen::VectorXd& loss) {
  const dftrl::OccupancyLayout l = spec.layout();
  const int slots = spec.horizon * spec.states;
  long total = 1;
  for (int i = 0; i < slots; ++i) total *= spec.actions;
  double best = std::numeric_limits<double>::infinity();
  for (long code = 0; code < total; ++code) {
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(l.loss_size());
    long c = code;
    for (int h = 0; h < spec.horizon; ++h)
      for (int s = 0; s < spec.states; ++s) {
        pi(l.loss_index(h, s, static_cast<int>(c % spec.actions))) = 1.0;
        c /= spec.actions;
      }
    best = std::min(best, path_occupancy(spec, pi, spec.transitions).dot(loss));
  }
  return best;
}

/// Two-state MDPs only: entrywise max of w^{pi, p'}_h(s, a) over every p' whose
/// rows p'(0 | s, a) lie on a grid of the given step inside the eps band.
inline Eigen::VectorXd grid_upper_occupancy(const dftrl::MdpSpec& spec, const Eigen::VectorXd& policy, double eps,
                                            double step) {
  const dftrl::OccupancyLayout l = spec.layout();
  // Rows that can influence layers 1..H-1.
  std::vector<std::pair<int, int>> rows;  // (h, s * A + a)
  for (int h = 0; h + 1 < spec.horizon; ++h)
    for (int s = 0; s < spec.states; ++s) {
      if (h == 0 && s != spec.initial_state) continue;
      for (int a = 0; a < spec.actions; ++a) rows.push_back({h, s * spec.actions + a});
    }
  std::vector<std::vector<double>> grids;
  for (const auto& [h, sa] : rows) {
    const int s = sa / spec.actions, a = sa % spec.actions;
    const double p0 = spec.transitions(l.full_index(h, s, a, 0));
    const double lo = std::max(0.0, p0 - eps), hi = std::min(1.0, p0 + eps);
    std::vector<double> g;
    for (double q = lo; q < hi - 1e-12; q += step) g.push_back(q);
    g.push_back(hi);
    grids.push_back(g);
  }
  Eigen::VectorXd best = Eigen::VectorXd::Zero(l.loss_size());
  std::vector<std::size_t> idx(rows.size(), 0);
  Eigen::VectorXd trans = spec.transitions;
  while (true) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto [h, sa] = rows[r];
      const int s = sa / spec.actions, a = sa % spec.actions;
      trans(l.full_index(h, s, a, 0)) = grids[r][idx[r]];
      trans(l.full_index(h, s, a, 1)) = 1.0 - grids[r][idx[r]];
    }
    const Eigen::VectorXd occ =
        dftrl::state_action_marginal(l, dftrl::occupancy_from_policy(spec, policy, trans));
    best = best.cwiseMax(occ);
    std::size_t r = 0;
    while (r < rows.size() && ++idx[r] == grids[r].size()) idx[r++] = 0;
    if (r == rows.size()) break;
  }
  return best;
}

inline Eigen::VectorXd random_policy(const dftrl::OccupancyLayout& l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd pi(l.loss_size());
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s) {
      double total = 0.0;
      for (int a = 0; a < l.actions(); ++a) total += pi(l.loss_index(h, s, a)) = u(rng);
      for (int a = 0; a < l.actions(); ++a) pi(l.loss_index(h, s, a)) /= total;
    }
  return pi;
}

}  // namespace oracle
