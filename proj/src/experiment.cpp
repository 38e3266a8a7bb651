#include "dftrl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include "dftrl/counter_rng.hpp"
#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/linear_bandit.hpp"
#include "dftrl/semi_bandit.hpp"

namespace dftrl {

using detail::Overloaded;

namespace {

int clamp_guess(long long g) { return static_cast<int>(std::min<long long>(g, 1 << 30)); }

struct Budget {
  int horizon;
  long long total_missing;
};

class SemiRunner {
 public:
  SemiRunner(const ExperimentConfig& cfg, Budget b) : cfg_(cfg), b_(b), actions_(std::get<CombActionSet>(cfg.problem)) {}

  SemiBanditParams params(int d_max) const {
    SemiBanditParams p = tune_semibandit(actions_.budget(), actions_.dim(), b_.horizon, b_.total_missing, d_max);
    if (cfg_.tuning.mode == TuningMode::Explicit) {
      p.eta = cfg_.tuning.eta;
      p.gamma = cfg_.tuning.gamma;
    }
    return p;
  }
  double bound(int d_max) const { return theorem_bound_comb(params(d_max)); }
  double max_round_regret() const { return 2.0 * actions_.budget(); }

  void reset(int d_max) { learner_.emplace(actions_, params(d_max)); }
  double play(int t, const Eigen::VectorXd& loss, std::mt19937_64& rng) {
    const Iterate& it = learner_->prepare_round(t);
    steps_ += it.newton_steps;
    const double expected = it.w.dot(loss);
    const Eigen::VectorXd a = learner_->play(rng);
    feedback_[t] = a.cwiseProduct(loss);
    return expected;
  }
  void deliver(int tau) {
    auto it = feedback_.find(tau);
    learner_->receive(tau, it->second);
    feedback_.erase(it);
  }
  double comparator(const Eigen::VectorXd& cumulative) const {
    return best_in_hindsight_comb(cumulative, actions_).dot(cumulative);
  }
  InvariantReport invariants() const { return learner_ ? learner_->invariants() : InvariantReport{}; }
  long steps() const { return steps_; }
  void finish(RegretTrace&) const {}

 private:
  const ExperimentConfig& cfg_;
  Budget b_;
  CombActionSet actions_;
  std::optional<SemiBanditLearner> learner_;
  std::unordered_map<int, Eigen::VectorXd> feedback_;
  long steps_ = 0;
};

class MdpRunner {
 public:
  MdpRunner(const ExperimentConfig& cfg, Budget b) : cfg_(cfg), b_(b), spec_(std::get<MdpSpec>(cfg.problem)) {}

  MdpParams params(int d_max) const {
    MdpParams p = tune_mdp(spec_.horizon, spec_.states, spec_.actions, b_.horizon, b_.total_missing, d_max);
    if (cfg_.tuning.mode == TuningMode::Explicit) {
      p.eta = cfg_.tuning.eta;
      p.gamma = cfg_.tuning.gamma;
    }
    return p;
  }
  double bound(int d_max) const { return theorem_bound_mdp(params(d_max)); }
  double max_round_regret() const { return spec_.horizon; }

  void reset(int d_max) {
    if (learner_) merge_diagnostics(learner_->diagnostics());
    learner_.emplace(spec_, params(d_max));
  }
  double play(int t, const Eigen::VectorXd& loss, std::mt19937_64& rng) {
    const Eigen::VectorXd policy = learner_->prepare_round(t);
    steps_ += learner_->iterate().newton_steps;
    learner_->played(loss);
    feedback_[t] = rollout(spec_, policy, loss, rng);
    return policy_value(spec_, policy, loss);
  }
  void deliver(int tau) {
    auto it = feedback_.find(tau);
    learner_->receive(tau, it->second);
    feedback_.erase(it);
  }
  double comparator(const Eigen::VectorXd& cumulative) const { return best_in_hindsight_mdp(spec_, cumulative).value; }
  InvariantReport invariants() const { return learner_ ? learner_->invariants() : InvariantReport{}; }
  long steps() const { return steps_; }
  void finish(RegretTrace& trace) {
    if (learner_) merge_diagnostics(learner_->diagnostics());
    trace.mdp = diag_;
  }

 private:
  void merge_diagnostics(const MdpDiagnostics& d) {
    diag_.rounds += d.rounds;
    diag_.worst_equality = std::max(diag_.worst_equality, d.worst_equality);
    diag_.worst_slack = std::min(diag_.worst_slack, d.worst_slack);
    diag_.upper_violations += d.upper_violations;
    diag_.worst_upper_gap = std::max(diag_.worst_upper_gap, d.worst_upper_gap);
    diag_.worst_policy_gap = std::max(diag_.worst_policy_gap, d.worst_policy_gap);
    diag_.worst_loss_norm_ratio = std::max(diag_.worst_loss_norm_ratio, d.worst_loss_norm_ratio);
  }

  const ExperimentConfig& cfg_;
  Budget b_;
  MdpSpec spec_;
  std::optional<MdpLearner> learner_;
  std::unordered_map<int, Trajectory> feedback_;
  MdpDiagnostics diag_;
  long steps_ = 0;
};

class LinearRunner {
 public:
  LinearRunner(const ExperimentConfig& cfg, Budget b)
      : cfg_(cfg), b_(b), dom_(std::get<DomainSpec>(cfg.problem)), radius_(domain_radius(dom_)),
        nu_(barrier_for(dom_).nu()), delta_(1.0 / std::sqrt(static_cast<double>(b.horizon))) {}

  LinearParams params(int d_max) const {
    LinearParams p = tune_linban(radius_, dom_.dim(), b_.horizon, b_.total_missing, d_max, nu_);
    if (cfg_.tuning.mode == TuningMode::Explicit) {
      p.eta = cfg_.tuning.eta;
      p.gamma = cfg_.tuning.gamma;
    }
    return p;
  }
  double bound(int d_max) const { return theorem_bound_lin(params(d_max)); }
  double max_round_regret() const { return 2.0 * radius_; }

  void reset(int d_max) {
    if (learner_) identity_gap_ = std::max(identity_gap_, learner_->worst_identity_gap());
    learner_.emplace(dom_, params(d_max));
  }
  double play(int t, const Eigen::VectorXd& loss, std::mt19937_64& rng) {
    const Iterate& it = learner_->prepare_round(t);
    steps_ += it.newton_steps;
    if (!w1_) w1_ = it.w;
    const double expected = it.w.dot(loss);
    const Eigen::VectorXd a = learner_->play(rng);
    realized_ = a.dot(loss);
    feedback_[t] = realized_;
    return expected;
  }
  double realized() const { return realized_; }
  void deliver(int tau) {
    auto it = feedback_.find(tau);
    learner_->receive(tau, it->second);
    feedback_.erase(it);
  }
  double comparator(const Eigen::VectorXd& cumulative) const {
    return best_in_hindsight_lin(cumulative, dom_).dot(cumulative);
  }
  double shifted(const Eigen::VectorXd& cumulative) const {
    return shifted_comparator(best_in_hindsight_lin(cumulative, dom_), *w1_, delta_).dot(cumulative);
  }
  InvariantReport invariants() const { return learner_ ? learner_->invariants() : InvariantReport{}; }
  long steps() const { return steps_; }
  void finish(RegretTrace& trace) {
    if (learner_) identity_gap_ = std::max(identity_gap_, learner_->worst_identity_gap());
    trace.identity_gap = identity_gap_;
  }

 private:
  const ExperimentConfig& cfg_;
  Budget b_;
  DomainSpec dom_;
  double radius_;
  double nu_;
  double delta_;
  std::optional<LinearLearner> learner_;
  std::optional<Eigen::VectorXd> w1_;
  std::unordered_map<int, double> feedback_;
  double realized_ = 0.0;
  double identity_gap_ = 0.0;
  long steps_ = 0;
};

template <class Runner>
double config_bound(const ExperimentConfig& cfg, const Runner& runner, int d_max) {
  if (cfg.tuning.mode != TuningMode::Doubling) return runner.bound(d_max);
  const double log_t = std::log(static_cast<double>(cfg.horizon));
  return 2.0 * runner.bound(2 * d_max) * log_t + 2.0 * runner.max_round_regret() * d_max * log_t;
}

template <class Runner>
RegretTrace simulate(const ExperimentConfig& cfg, int r) {
  constexpr bool linear = std::is_same_v<Runner, LinearRunner>;
  const DelaySchedule schedule(cfg.delay, cfg.horizon);
  const DelayState delays(schedule);
  const int t_max = cfg.horizon;
  Runner runner(cfg, Budget{t_max, schedule.total_missing()});
  RegretTrace trace;
  trace.theorem_bound = config_bound(cfg, runner, schedule.d_max());
  trace.learner_loss.reserve(t_max);
  trace.comparator_loss.reserve(t_max);
  trace.pseudo_regret.reserve(t_max);
  trace.missing_count.reserve(t_max);
  trace.epoch.reserve(t_max);

  std::mt19937_64 rng(counter_hash({cfg.seed, static_cast<std::uint64_t>(r)}));
  const bool doubling = cfg.tuning.mode == TuningMode::Doubling;
  DoublingController ctrl;
  runner.reset(doubling ? clamp_guess(ctrl.guess()) : schedule.d_max());

  Eigen::VectorXd cumulative = Eigen::VectorXd::Zero(cfg.loss_dim());
  double learner_total = 0.0, realized_total = 0.0;
  try {
    for (int t = 1; t <= t_max; ++t) {
      if (doubling && t > 1) {
        std::vector<int> newly;
        for (int tau : delays.arrivals_at(t - 1)) newly.push_back(schedule.delay(tau));
        if (ctrl.begin_round(t, newly)) {
          trace.invariants.merge(runner.invariants());
          runner.reset(clamp_guess(ctrl.guess()));
        }
      }
      const Eigen::VectorXd loss = cfg.environment->losses_for_round(t);
      require_range(loss, cfg.loss_range());

      learner_total += runner.play(t, loss, rng);
      cumulative += loss;
      const double comp = runner.comparator(cumulative);
      trace.learner_loss.push_back(learner_total);
      trace.comparator_loss.push_back(comp);
      trace.pseudo_regret.push_back(learner_total - comp);
      trace.missing_count.push_back(delays.missing_count(t));
      trace.epoch.push_back(ctrl.epoch());
      if constexpr (linear) {
        realized_total += runner.realized();
        trace.realized_loss.push_back(realized_total);
        trace.realized_regret.push_back(realized_total - comp);
        trace.shifted_regret.push_back(learner_total - runner.shifted(cumulative));
      }

      // A restarted learner never sees feedback from before its epoch.
      for (int tau : delays.arrivals_at(t))
        if (!doubling || tau >= ctrl.epoch_start()) runner.deliver(tau);
    }
  } catch (const std::exception& e) {
    trace.failed = true;
    trace.error = e.what();
  }
  trace.invariants.merge(runner.invariants());
  trace.newton_steps = runner.steps();
  runner.finish(trace);
  return trace;
}

double quantile(std::vector<double>& v, double q) {
  // Linear interpolation between order statistics.
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

BoundReport bound_for(const ExperimentConfig& cfg) {
  const DelaySchedule schedule(cfg.delay, cfg.horizon);
  BoundReport out;
  out.d_max = schedule.d_max();
  out.total_missing = schedule.total_missing();
  out.sum_delays = schedule.sum_delays();
  const Budget b{cfg.horizon, out.total_missing};
  auto fill = [&](const auto& runner) {
    const auto p = runner.params(out.d_max);
    out.eta = p.eta;
    out.gamma = p.gamma;
    out.theorem_bound = config_bound(cfg, runner, out.d_max);
  };
  switch (cfg.setting) {
    case Setting::SemiBandit:
      fill(SemiRunner(cfg, b));
      break;
    case Setting::Mdp:
      fill(MdpRunner(cfg, b));
      break;
    case Setting::Linear:
      fill(LinearRunner(cfg, b));
      break;
  }
  return out;
}

RegretTrace run_replication(const ExperimentConfig& cfg, int r) {
  switch (cfg.setting) {
    case Setting::SemiBandit:
      return simulate<SemiRunner>(cfg, r);
    case Setting::Mdp:
      return simulate<MdpRunner>(cfg, r);
    case Setting::Linear:
      return simulate<LinearRunner>(cfg, r);
  }
  throw RejectedInput("experiment: unknown setting");
}

std::vector<RegretTrace> run_experiment_serial(const ExperimentConfig& cfg) {
  std::vector<RegretTrace> out(cfg.replications);
  for (int r = 0; r < cfg.replications; ++r) out[r] = run_replication(cfg, r);
  return out;
}

std::vector<RegretTrace> run_experiment(const ExperimentConfig& cfg) {
  std::vector<RegretTrace> out(cfg.replications);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < cfg.replications; ++r) out[r] = run_replication(cfg, r);
  return out;
}

Summary aggregate(const std::vector<RegretTrace>& traces) {
  std::vector<const RegretTrace*> ok;
  for (const auto& t : traces)
    if (!t.failed) ok.push_back(&t);
  if (ok.empty()) throw RejectedInput("aggregate: no completed traces");
  const std::size_t n = ok.front()->pseudo_regret.size();
  for (const auto* t : ok)
    if (t->pseudo_regret.size() != n) throw RejectedInput("aggregate: traces differ in length");

  Summary s;
  s.replications = static_cast<int>(ok.size());
  s.failed = static_cast<int>(traces.size() - ok.size());
  s.theorem_bound = ok.front()->theorem_bound;
  s.missing_count = ok.front()->missing_count;
  s.epoch = ok.front()->epoch;
  for (const auto* t : ok) s.invariants.merge(t->invariants);
  s.mean.resize(n);
  s.median.resize(n);
  s.q10.resize(n);
  s.q90.resize(n);
  const bool linear = !ok.front()->realized_regret.empty();
  if (linear) {
    s.realized_mean.assign(n, 0.0);
    s.shifted_mean.assign(n, 0.0);
  }
  std::vector<double> col(ok.size());
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < ok.size(); ++k) {
      col[k] = ok[k]->pseudo_regret[i];
      sum += col[k];
      if (linear) {
        s.realized_mean[i] += ok[k]->realized_regret[i] / static_cast<double>(ok.size());
        s.shifted_mean[i] += ok[k]->shifted_regret[i] / static_cast<double>(ok.size());
      }
    }
    s.mean[i] = sum / static_cast<double>(ok.size());
    s.median[i] = quantile(col, 0.5);
    s.q10[i] = quantile(col, 0.1);
    s.q90[i] = quantile(col, 0.9);
  }
  return s;
}

std::string summary_csv(const Summary& s) {
  if (s.mean.empty()) throw RejectedInput("export: empty summary");
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  os << "round,pseudo_regret_mean,pseudo_regret_q10,pseudo_regret_q90,theorem_bound,missing_count,epoch\n";
  for (std::size_t i = 0; i < s.mean.size(); ++i)
    os << i + 1 << ',' << s.mean[i] << ',' << s.q10[i] << ',' << s.q90[i] << ',' << s.theorem_bound << ','
       << s.missing_count[i] << ',' << s.epoch[i] << '\n';
  return os.str();
}

nlohmann::json summary_json(const Summary& s, const ExperimentConfig& cfg) {
  if (s.mean.empty()) throw RejectedInput("export: empty summary");
  nlohmann::json j;
  j["config"] = cfg.source;
  j["replications"] = s.replications;
  j["failed_replications"] = s.failed;
  j["theorem_bound"] = s.theorem_bound;
  std::vector<int> rounds(s.mean.size());
  for (std::size_t i = 0; i < rounds.size(); ++i) rounds[i] = static_cast<int>(i + 1);
  j["round"] = rounds;
  j["pseudo_regret_mean"] = s.mean;
  j["pseudo_regret_median"] = s.median;
  j["pseudo_regret_q10"] = s.q10;
  j["pseudo_regret_q90"] = s.q90;
  j["missing_count"] = s.missing_count;
  j["epoch"] = s.epoch;
  if (!s.realized_mean.empty()) {
    j["realized_regret_mean"] = s.realized_mean;
    j["shifted_regret_mean"] = s.shifted_mean;
  }
  const InvariantReport& inv = s.invariants;
  j["invariants"] = {{"norm_checks", inv.norm_checks},
                     {"norm_violations", inv.norm_violations},
                     {"worst_norm_ratio", inv.worst_norm_ratio},
                     {"dikin_checks", inv.dikin_checks},
                     {"dikin_violations", inv.dikin_violations},
                     {"worst_dikin_distance", inv.worst_dikin_distance},
                     {"feasibility_checks", inv.feasibility_checks},
                     {"feasibility_violations", inv.feasibility_violations}};
  return j;
}

std::string export_summary(const Summary& s, const ExperimentConfig& cfg, const std::string& dir, ExportFormat fmt) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = (std::filesystem::path(dir) / (fmt == ExportFormat::Csv ? "summary.csv" : "summary.json")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RejectedInput("export: cannot write " + path);
  if (fmt == ExportFormat::Csv)
    out << summary_csv(s);
  else
    out << summary_json(s, cfg).dump(2) << '\n';
  if (!out) throw RejectedInput("export: write failed for " + path);
  return path;
}

}  // namespace dftrl
