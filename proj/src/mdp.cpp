#include "dftrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dftrl/errors.hpp"

namespace dftrl {

namespace {

void check_policy(const OccupancyLayout& l, const Eigen::VectorXd& policy) {
  if (policy.size() != l.loss_size()) throw RejectedInput("mdp: policy tensor has wrong size");
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s) {
      double total = 0.0;
      for (int a = 0; a < l.actions(); ++a) {
        const double p = policy(l.loss_index(h, s, a));
        if (p < 0.0) throw RejectedInput("mdp: negative policy probability");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw RejectedInput("mdp: policy row does not sum to 1");
    }
}

// max of sum_i q(i) v(i) over q in the simplex with |q - p| <= eps entrywise.
double band_knapsack(const double* p, const Eigen::VectorXd& v, double eps, std::vector<int>& order) {
  const int n = static_cast<int>(v.size());
  double mass = 1.0;
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lo = std::max(0.0, p[i] - eps);
    mass -= lo;
    value += lo * v(i);
  }
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v(a) > v(b); });
  for (int i : order) {
    if (mass <= 0.0) break;
    const double lo = std::max(0.0, p[i] - eps);
    const double room = std::min(1.0, p[i] + eps) - lo;
    const double add = std::min(room, mass);
    value += add * v(i);
    mass -= add;
  }
  return value;
}

}  // namespace

void MdpSpec::validate() const {
  if (states < 1 || actions < 1 || horizon < 1 || episodes < 1)
    throw RejectedInput("mdp: S, A, H and T must be >= 1");
  if (initial_state < 0 || initial_state >= states) throw RejectedInput("mdp: initial state out of range");
  const OccupancyLayout l = layout();
  if (transitions.size() != l.full_size()) throw RejectedInput("mdp: transition tensor has wrong size");
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < states; ++s)
      for (int a = 0; a < actions; ++a) {
        double total = 0.0;
        for (int n = 0; n < states; ++n) {
          const double p = transitions(l.full_index(h, s, a, n));
          if (!(p >= 0.0)) throw RejectedInput("mdp: transition probabilities must be nonnegative");
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) throw RejectedInput("mdp: transition row does not sum to 1");
      }
}

MdpSpec random_mdp(int states, int actions, int horizon, int episodes, std::uint64_t seed) {
  MdpSpec spec;
  spec.states = states;
  spec.actions = actions;
  spec.horizon = horizon;
  spec.episodes = episodes;
  const OccupancyLayout l = spec.layout();
  spec.transitions.resize(l.full_size());
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < states; ++s)
      for (int a = 0; a < actions; ++a) {
        double total = 0.0;
        for (int n = 0; n < states; ++n) total += spec.transitions(l.full_index(h, s, a, n)) = expo(rng);
        for (int n = 0; n < states; ++n) spec.transitions(l.full_index(h, s, a, n)) /= total;
      }
  spec.validate();
  return spec;
}

double confidence_radius(const MdpSpec& spec) {
  return 1.0 / (static_cast<double>(spec.episodes) * spec.horizon * spec.states * spec.actions);
}

double occupancy_floor(const MdpSpec& spec) {
  const double t = spec.episodes, h = spec.horizon, s = spec.states, a = spec.actions;
  return 1.0 / (t * t * t * h * h * s * s * s * s * a * a);
}

Eigen::VectorXd occupancy_from_policy(const MdpSpec& spec, const Eigen::VectorXd& policy,
                                      const Eigen::VectorXd& transitions) {
  const OccupancyLayout l = spec.layout();
  check_policy(l, policy);
  return occupancy_forward(l, policy, transitions);
}

Eigen::VectorXd occupancy_from_policy(const MdpSpec& spec, const Eigen::VectorXd& policy) {
  return occupancy_from_policy(spec, policy, spec.transitions);
}

Eigen::VectorXd state_action_marginal(const OccupancyLayout& l, const Eigen::VectorXd& dense) {
  if (dense.size() != l.full_size()) throw RejectedInput("mdp: occupancy tensor has wrong size");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(l.loss_size());
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s)
      for (int a = 0; a < l.actions(); ++a)
        for (int n = 0; n < l.states(); ++n) m(l.loss_index(h, s, a)) += dense(l.full_index(h, s, a, n));
  return m;
}

Eigen::VectorXd policy_from_occupancy(const OccupancyLayout& l, const Eigen::VectorXd& dense) {
  const Eigen::VectorXd m = state_action_marginal(l, dense);
  Eigen::VectorXd pi(l.loss_size());
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s) {
      double total = 0.0;
      for (int a = 0; a < l.actions(); ++a) total += m(l.loss_index(h, s, a));
      if (h == 0 && s != l.initial_state()) {
        for (int a = 0; a < l.actions(); ++a) pi(l.loss_index(h, s, a)) = 1.0 / l.actions();
        continue;
      }
      if (!(total > 0.0)) throw RejectedInput("mdp: state has zero visitation mass");
      for (int a = 0; a < l.actions(); ++a) pi(l.loss_index(h, s, a)) = m(l.loss_index(h, s, a)) / total;
    }
  return pi;
}

Eigen::VectorXd induced_transitions(const OccupancyLayout& l, const Eigen::VectorXd& dense) {
  const Eigen::VectorXd m = state_action_marginal(l, dense);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(l.full_size());
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s)
      for (int a = 0; a < l.actions(); ++a) {
        const double total = m(l.loss_index(h, s, a));
        if (!(total > 0.0)) continue;
        for (int n = 0; n < l.states(); ++n) p(l.full_index(h, s, a, n)) = dense(l.full_index(h, s, a, n)) / total;
      }
  return p;
}

OccupancyPolytope build_mdp_domain(const MdpSpec& spec) {
  spec.validate();
  return OccupancyPolytope{spec.layout(), spec.transitions, confidence_radius(spec), occupancy_floor(spec),
                           spec.episodes};
}

Eigen::VectorXd shifted_occupancy(const MdpSpec& spec, const Eigen::VectorXd& policy, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw RejectedInput("mdp: mixture weight must lie in [0, 1]");
  const OccupancyLayout l = spec.layout();
  const double eps = confidence_radius(spec);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(l.loss_size(), 1.0 / l.actions());
  const Eigen::VectorXd smoothed = ((1.0 - eps) * spec.transitions.array() + eps / l.states()).matrix();
  return (1.0 - weight) * occupancy_from_policy(spec, policy) + weight * occupancy_forward(l, uniform, smoothed);
}

Eigen::VectorXd upper_occupancy(const MdpSpec& spec, const Eigen::VectorXd& policy, double eps) {
  const OccupancyLayout l = spec.layout();
  check_policy(l, policy);
  if (!(eps >= 0.0)) throw RejectedInput("mdp: confidence radius must be nonnegative");
  const int hs = l.horizon(), ns = l.states(), na = l.actions();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(l.loss_size());
  std::vector<int> order(ns);
  Eigen::VectorXd v(ns), prev(ns);
  for (int target_h = 0; target_h < hs; ++target_h) {
    for (int target_s = 0; target_s < ns; ++target_s) {
      // v(x) = max probability of reaching target_s at target_h from x at layer k.
      v.setZero();
      v(target_s) = 1.0;
      for (int k = target_h - 1; k >= 0; --k) {
        prev = v;
        for (int x = 0; x < ns; ++x) {
          double val = 0.0;
          for (int a = 0; a < na; ++a) {
            const double pa = policy(l.loss_index(k, x, a));
            if (pa == 0.0) continue;
            val += pa * band_knapsack(spec.transitions.data() + l.full_index(k, x, a, 0), prev, eps, order);
          }
          v(x) = val;
        }
      }
      const double reach = v(l.initial_state());
      for (int a = 0; a < na; ++a)
        u(l.loss_index(target_h, target_s, a)) = reach * policy(l.loss_index(target_h, target_s, a));
    }
  }
  return u;
}

Trajectory rollout(const MdpSpec& spec, const Eigen::VectorXd& policy, const Eigen::VectorXd& loss,
                   std::mt19937_64& rng) {
  const OccupancyLayout l = spec.layout();
  if (loss.size() != l.loss_size()) throw RejectedInput("mdp: loss tensor has wrong size");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&](auto prob, int n) {
    double u = unif(rng);
    for (int i = 0; i < n - 1; ++i) {
      if (u < prob(i)) return i;
      u -= prob(i);
    }
    return n - 1;
  };
  Trajectory tr;
  int s = l.initial_state();
  for (int h = 0; h < l.horizon(); ++h) {
    const int a = draw([&](int i) { return policy(l.loss_index(h, s, i)); }, l.actions());
    tr.states.push_back(s);
    tr.actions.push_back(a);
    tr.losses.push_back(loss(l.loss_index(h, s, a)));
    s = draw([&](int i) { return spec.transitions(l.full_index(h, s, a, i)); }, l.states());
  }
  return tr;
}

Eigen::VectorXd mdp_estimate(const OccupancyLayout& l, const Trajectory& traj, const Eigen::VectorXd& upper) {
  if (static_cast<int>(traj.states.size()) != l.horizon() || traj.actions.size() != traj.states.size() ||
      traj.losses.size() != traj.states.size())
    throw RejectedInput("mdp estimate: trajectory length differs from H");
  if (upper.size() != l.loss_size()) throw RejectedInput("mdp estimate: upper occupancy has wrong size");
  Eigen::VectorXd est = Eigen::VectorXd::Zero(l.loss_size());
  for (int h = 0; h < l.horizon(); ++h) {
    const int i = l.loss_index(h, traj.states[h], traj.actions[h]);
    if (!(upper(i) > 0.0)) throw NumericalError("mdp estimate: visited entry has nonpositive upper occupancy");
    est(i) = traj.losses[h] / upper(i);
  }
  return est;
}

Eigen::VectorXd expand_loss(const OccupancyLayout& l, const Eigen::VectorXd& loss) {
  if (loss.size() != l.loss_size()) throw RejectedInput("mdp: loss tensor has wrong size");
  Eigen::VectorXd out(l.packed_size());
  for (int h = 0; h < l.horizon(); ++h)
    for (int s = 0; s < l.states(); ++s)
      for (int a = 0; a < l.actions(); ++a)
        for (int n = 0; n < l.states(); ++n) {
          const int p = l.packed_index(h, s, a, n);
          if (p >= 0) out(p) = loss(l.loss_index(h, s, a));
        }
  return out;
}

MdpParams tune_mdp(int horizon, int states, int actions, int episodes, long long total_missing, int d_max) {
  if (horizon < 1 || states < 1 || actions < 1 || episodes < 1) throw RejectedInput("mdp tuning: sizes must be >= 1");
  if (total_missing < 0) throw RejectedInput("mdp tuning: D must be >= 0");
  MdpParams p;
  p.horizon = horizon;
  p.states = states;
  p.actions = actions;
  p.episodes = episodes;
  p.total_missing = total_missing;
  p.d_max = std::max(1, d_max);
  const double h = horizon, sat = static_cast<double>(states) * actions * episodes;
  const double one_d = 1.0 + p.d_max;
  p.gamma = 1.0 / (4096.0 * h * one_d * one_d);
  const double log_term = std::log(h * sat);
  const double second = log_term > 0.0 ? 1.0 / std::sqrt((sat + static_cast<double>(total_missing)) * log_term)
                                       : std::numeric_limits<double>::infinity();
  p.eta = std::min(1.0 / (256.0 * h * one_d * one_d), second);
  return p;
}

double theorem_bound_mdp(const MdpParams& p) {
  const double h = p.horizon, s = p.states, a = p.actions, sat = s * a * p.episodes;
  const double log_term = std::log(h * sat);
  const double one_d = 1.0 + p.d_max;
  return 10.0 * h * std::sqrt(sat * log_term) + 10.0 * h * std::sqrt(static_cast<double>(p.total_missing) * log_term) +
         7e5 * h * h * s * s * a * one_d * one_d;
}

MdpComparator best_in_hindsight_mdp(const MdpSpec& spec, const Eigen::VectorXd& cumulative_loss) {
  const OccupancyLayout l = spec.layout();
  if (cumulative_loss.size() != l.loss_size()) throw RejectedInput("mdp comparator: loss tensor has wrong size");
  MdpComparator out;
  out.policy = Eigen::VectorXd::Zero(l.loss_size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(l.states());
  for (int h = l.horizon() - 1; h >= 0; --h) {
    Eigen::VectorXd next(l.states());
    for (int s = 0; s < l.states(); ++s) {
      int best_a = 0;
      double best_q = std::numeric_limits<double>::infinity();
      for (int a = 0; a < l.actions(); ++a) {
        double q = cumulative_loss(l.loss_index(h, s, a));
        for (int n = 0; n < l.states(); ++n) q += spec.transitions(l.full_index(h, s, a, n)) * v(n);
        if (q < best_q) {
          best_q = q;
          best_a = a;
        }
      }
      next(s) = best_q;
      out.policy(l.loss_index(h, s, best_a)) = 1.0;
    }
    v = next;
  }
  out.value = v(l.initial_state());
  return out;
}

double policy_value(const MdpSpec& spec, const Eigen::VectorXd& policy, const Eigen::VectorXd& loss) {
  return state_action_marginal(spec.layout(), occupancy_from_policy(spec, policy)).dot(loss);
}

MdpLearner::MdpLearner(MdpSpec spec, MdpParams params, SolverOptions opts)
    : spec_(std::move(spec)), layout_(spec_.layout()), params_(params), domain_(build_mdp_domain(spec_)),
      ftrl_(Regularizer(EntropyLogBarrier{params.eta, params.gamma}, layout_.packed_size()), DomainSpec(domain_), opts),
      monitor_(params.d_max, InvariantMonitor::default_norm_budget(params.d_max)) {}

const Eigen::VectorXd& MdpLearner::prepare_round(int t) {
  round_ = t;
  const Iterate& it = ftrl_.update();
  monitor_.record_iterate(ftrl_.regularizer(), it.w);
  const FeasibilityReport feas = ftrl_.problem().domain().check(it.w);
  monitor_.record_feasibility(feas.equality_violation <= 1e-8 && feas.min_slack >= -1e-8);
  ++diag_.rounds;
  diag_.worst_equality = std::max(diag_.worst_equality, feas.equality_violation);
  diag_.worst_slack = std::min(diag_.worst_slack, feas.min_slack);

  const Eigen::VectorXd dense = layout_.unpack(it.w);
  policy_ = policy_from_occupancy(layout_, dense);
  return policy_;
}

void MdpLearner::played(const Eigen::VectorXd& true_loss) {
  const Eigen::VectorXd& w = ftrl_.current().w;
  const Eigen::VectorXd upper = upper_occupancy(spec_, policy_, domain_.confidence_radius);

  const Eigen::VectorXd w_sa = state_action_marginal(layout_, layout_.unpack(w));
  const Eigen::VectorXd w_pi = state_action_marginal(layout_, occupancy_from_policy(spec_, policy_));
  const double tol = 1e-9;
  if (((upper.array() + tol) < w_sa.array().max(w_pi.array())).any()) ++diag_.upper_violations;
  const double t = spec_.episodes, h = spec_.horizon, s = spec_.states;
  diag_.worst_upper_gap = std::max(diag_.worst_upper_gap, (upper - w_sa).lpNorm<1>() / (4.0 * h * h * s / t));
  diag_.worst_policy_gap = std::max(diag_.worst_policy_gap, (w_pi - w_sa).lpNorm<1>() / (2.0 * h / t));
  if (true_loss.size() == layout_.loss_size()) {
    const LocalNormContext ctx(ftrl_.regularizer(), w);
    const double budget = 1.0 / (16.0 * (1.0 + params_.d_max));
    diag_.worst_loss_norm_ratio =
        std::max(diag_.worst_loss_norm_ratio, ctx.local_norm(expand_loss(layout_, true_loss)) / budget);
  }
  pending_[round_] = Record{w, upper};
}

Eigen::VectorXd MdpLearner::receive(int tau, const Trajectory& traj) {
  const auto it = pending_.find(tau);
  if (it == pending_.end()) throw RejectedInput("mdp: feedback for an episode that was not played");
  const Eigen::VectorXd est = expand_loss(layout_, mdp_estimate(layout_, traj, it->second.upper));
  monitor_.record_estimate(LocalNormContext(ftrl_.regularizer(), it->second.w), est);
  ftrl_.add_estimate(est);
  pending_.erase(it);
  return est;
}

}  // namespace dftrl
