#include <cstdint>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dftrl/config.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/experiment.hpp"

using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int replications = 0;
  std::string output;
  std::string format;
};

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

bool given(const CLI::App& sub, const std::string& name) {
  const CLI::Option* o = sub.get_option_no_throw(name);
  return o != nullptr && o->count() > 0;
}

dftrl::ExperimentConfig load(const Flags& f, const CLI::App& sub) {
  dftrl::ExperimentConfig cfg = dftrl::load_config(f.config);
  json over = json::object();
  if (given(sub, "--seed")) over["seed"] = f.seed;
  if (given(sub, "--replications")) over["replications"] = f.replications;
  if (given(sub, "--output")) over["dir"] = f.output;
  if (given(sub, "--format")) over["format"] = f.format;
  return over.empty() ? cfg : dftrl::with_overrides(cfg, over);
}

json bound_json(const dftrl::ExperimentConfig& cfg) {
  const dftrl::BoundReport b = dftrl::bound_for(cfg);
  return {{"setting", dftrl::to_string(cfg.setting)},
          {"tuning", dftrl::to_string(cfg.tuning.mode)},
          {"horizon", cfg.horizon},
          {"d_max", b.d_max},
          {"total_missing", b.total_missing},
          {"sum_delays", b.sum_delays},
          {"eta", b.eta},
          {"gamma", b.gamma},
          {"theorem_bound", b.theorem_bound}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed FTRL experiments for semi-bandits, adversarial MDPs and linear bandits"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub, bool full) {
    sub->add_option("--config", f.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Override the config seed");
    sub->add_option("--replications", f.replications, "Override the replication count")->check(CLI::Range(1, std::numeric_limits<int>::max()));
    if (full) {
      sub->add_option("--output", f.output, "Output directory");
      sub->add_option("--format", f.format, "Export format")->check(CLI::IsMember({"csv", "json"}));
    }
  };
  CLI::App* run = app.add_subcommand("run", "Run all replications and export the regret summary");
  CLI::App* validate = app.add_subcommand("validate", "Check a config against the schema and desk-scale caps");
  CLI::App* bound = app.add_subcommand("bound", "Print tuned parameters and the regret bound");
  add_common(run, true);
  add_common(validate, false);
  add_common(bound, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*validate) {
      const dftrl::ExperimentConfig cfg = load(f, *validate);
      json out = bound_json(cfg);
      out["valid"] = true;
      out["replications"] = cfg.replications;
      std::cout << out.dump(2) << '\n';
    } else if (*bound) {
      std::cout << bound_json(load(f, *bound)).dump(2) << '\n';
    } else {
      const dftrl::ExperimentConfig cfg = load(f, *run);
      const auto traces = dftrl::run_experiment(cfg);
      for (std::size_t r = 0; r < traces.size(); ++r)
        if (traces[r].failed)
          std::cerr << json{{"warning", "replication failed"}, {"replication", r}, {"message", traces[r].error}}.dump()
                    << '\n';
      const dftrl::Summary s = dftrl::aggregate(traces);
      const std::string path = dftrl::export_summary(s, cfg, cfg.output_dir, cfg.format);
      json out = {{"output", path},
                  {"replications", s.replications},
                  {"failed_replications", s.failed},
                  {"final_pseudo_regret_mean", s.mean.back()},
                  {"theorem_bound", s.theorem_bound},
                  {"invariants_clean", s.invariants.clean()}};
      std::cout << out.dump(2) << '\n';
    }
  } catch (const dftrl::RejectedInput& e) {
    return fail("rejected_input", e.what(), 3);
  } catch (const dftrl::ConvergenceError& e) {
    return fail("convergence", e.what(), 4);
  } catch (const dftrl::NumericalError& e) {
    return fail("numerical", e.what(), 4);
  } catch (const dftrl::InvariantViolation& e) {
    return fail("invariant", e.what(), 5);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
