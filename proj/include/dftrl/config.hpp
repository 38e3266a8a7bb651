#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include <json.hpp>

#include "dftrl/delay.hpp"
#include "dftrl/domain.hpp"
#include "dftrl/environments.hpp"
#include "dftrl/mdp.hpp"
#include "dftrl/semi_bandit.hpp"

namespace dftrl {

enum class Setting { SemiBandit, Mdp, Linear };
enum class TuningMode { Auto, Explicit, Doubling };
enum class ExportFormat { Csv, Json };

const char* to_string(Setting s);
const char* to_string(TuningMode m);

struct Tuning {
  TuningMode mode = TuningMode::Auto;
  double eta = 0.0;  // explicit mode only
  double gamma = 0.0;
};

/// Limits enforced before a run; a rejected config names the cap it broke.
struct DeskCaps {
  static constexpr int max_horizon = 50'000;
  static constexpr int max_replications = 1'000;
  static constexpr int max_dim = 64;
  static constexpr int max_states = 6;
  static constexpr int max_actions = 4;
  static constexpr int max_layers = 6;
  static constexpr int max_vertices = 4'096;
  static constexpr int max_polytope_rows = 64;
};

struct ExperimentConfig {
  Setting setting = Setting::SemiBandit;
  int horizon = 1;
  int replications = 1;
  std::uint64_t seed = 0;
  DelaySchedule::Variant delay = ConstantDelay{0};
  Tuning tuning;
  std::variant<std::monostate, CombActionSet, MdpSpec, DomainSpec> problem;
  std::shared_ptr<const LossGenerator> environment;
  std::string output_dir = ".";
  ExportFormat format = ExportFormat::Csv;
  nlohmann::json source;  // the document as given, with CLI overrides applied

  LossRange loss_range() const;
  int loss_dim() const;
};

/// Parses and validates; throws RejectedInput naming the offending field or cap.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Re-parses with overrides of seed / replications / output directory / format.
ExperimentConfig with_overrides(const ExperimentConfig& cfg, const nlohmann::json& overrides);

}  // namespace dftrl
