#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dftrl/config.hpp"
#include "dftrl/invariants.hpp"
#include "dftrl/mdp.hpp"

namespace dftrl {

/// Per-round cumulative quantities of one replication; all arrays have length
/// T unless the replication failed.
struct RegretTrace {
  std::vector<double> learner_loss;     // expected (w_t^T l_t, or w^{pi_t}^T l_t for MDPs)
  std::vector<double> comparator_loss;  // min over the domain of the prefix sum of losses
  std::vector<double> pseudo_regret;
  // Linear setting only: realized a_t^T l_t, and regret against the comparator
  // pulled toward w_1 by 1/(1 + delta), delta = 1/sqrt(T).
  std::vector<double> realized_loss;
  std::vector<double> realized_regret;
  std::vector<double> shifted_regret;
  std::vector<int> missing_count;
  std::vector<int> epoch;
  double theorem_bound = 0.0;
  InvariantReport invariants;
  std::optional<MdpDiagnostics> mdp;
  double identity_gap = 0.0;  // linear setting: worst | |est|_{R,w} - K |l^T a| |
  long newton_steps = 0;
  bool failed = false;
  std::string error;
};

/// Tuned parameters and bound for a config (auto mode; doubling uses the
/// epoch-level bound with the true d_max).
struct BoundReport {
  double eta = 0.0;
  double gamma = 0.0;
  int d_max = 1;
  long long total_missing = 0;
  long long sum_delays = 0;
  double theorem_bound = 0.0;
};

BoundReport bound_for(const ExperimentConfig& cfg);

/// Replication r, seeded from (cfg.seed, r).
RegretTrace run_replication(const ExperimentConfig& cfg, int r);

std::vector<RegretTrace> run_experiment_serial(const ExperimentConfig& cfg);
/// Replications in parallel; results are stored in replication order and are
/// bit-identical to the serial runner.
std::vector<RegretTrace> run_experiment(const ExperimentConfig& cfg);

struct Summary {
  int replications = 0;
  int failed = 0;
  std::vector<double> mean;
  std::vector<double> median;
  std::vector<double> q10;
  std::vector<double> q90;
  std::vector<double> realized_mean;  // linear setting only
  std::vector<double> shifted_mean;   // linear setting only
  double theorem_bound = 0.0;
  std::vector<int> missing_count;
  std::vector<int> epoch;  // from the first successful replication
  InvariantReport invariants;
};

/// Elementwise statistics over the successful traces. Throws RejectedInput
/// when none are available.
Summary aggregate(const std::vector<RegretTrace>& traces);

std::string summary_csv(const Summary& s);
nlohmann::json summary_json(const Summary& s, const ExperimentConfig& cfg);
/// Writes summary.csv or summary.json into `dir`; returns the path.
std::string export_summary(const Summary& s, const ExperimentConfig& cfg, const std::string& dir, ExportFormat fmt);

}  // namespace dftrl
