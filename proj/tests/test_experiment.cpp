#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dftrl/config.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/experiment.hpp"
#include "dftrl/linear_bandit.hpp"
#include "dftrl/semi_bandit.hpp"

using namespace dftrl;
using nlohmann::json;
using doctest::Approx;

namespace {

json semi_doc(int horizon, double gap) {
  return json{{"setting", "semi_bandit"},
              {"horizon", horizon},
              {"replications", 3},
              {"seed", 5},
              {"delay", {{"type", "constant"}, {"d", 2}}},
              {"tuning", {{"mode", "auto"}}},
              {"domain", {{"type", "m_sets"}, {"dim", 4}, {"budget", 2}}},
              {"environment", {{"type", "fixed_gap"}, {"base", {0.5, 0.5, 0.5, 0.5}}, {"gap", gap}, {"best", {0, 2}}}}};
}

json zero_doc(const std::string& setting) {
  json doc{{"setting", setting}, {"horizon", 40}, {"replications", 2}, {"seed", 1},
           {"delay", {{"type", "constant"}, {"d", 1}}}};
  if (setting == "semi_bandit") {
    doc["domain"] = {{"type", "m_sets"}, {"dim", 3}, {"budget", 1}};
    doc["environment"] = {{"type", "fixed_gap"}, {"base", {0.0, 0.0, 0.0}}};
  } else if (setting == "linear") {
    doc["domain"] = {{"type", "ball"}, {"dim", 2}, {"radius", 1.0}};
    doc["environment"] = {{"type", "linear_drift"}, {"theta", {0.0, 0.0}}, {"noise", 0.0}};
  } else {
    doc["domain"] = {{"states", 2}, {"actions", 2}, {"layers", 2}, {"seed", 3}};
    doc["environment"] = {{"type", "shifting_phases"}, {"phases", {{{"start", 1}, {"loss", std::vector<double>(8, 0.0)}}}}};
  }
  return doc;
}

RegretTrace trace_of(const std::vector<double>& v) {
  RegretTrace t;
  t.pseudo_regret = v;
  t.missing_count.assign(v.size(), 0);
  t.epoch.assign(v.size(), 0);
  return t;
}

}  // namespace

TEST_CASE("zero losses give zero regret") {
  for (const std::string s : {"semi_bandit", "mdp", "linear"}) {
    const ExperimentConfig cfg = parse_config(zero_doc(s));
    const RegretTrace tr = run_replication(cfg, 0);
    REQUIRE_FALSE(tr.failed);
    CHECK(tr.pseudo_regret.size() == 40);
    for (double r : tr.pseudo_regret) CHECK(r == 0.0);
  }
}

TEST_CASE("single round") {
  json doc = semi_doc(1, 0.1);
  const RegretTrace tr = run_replication(parse_config(doc), 0);
  CHECK(tr.pseudo_regret.size() == 1);
  CHECK(tr.missing_count == std::vector<int>{0});
}

TEST_CASE("traces are deterministic and parallel matches serial") {
  const ExperimentConfig cfg = parse_config(semi_doc(300, 0.2));
  const RegretTrace a = run_replication(cfg, 1), b = run_replication(cfg, 1), c = run_replication(cfg, 2);
  CHECK(a.pseudo_regret == b.pseudo_regret);
  CHECK(a.learner_loss == b.learner_loss);
  CHECK(a.pseudo_regret != c.pseudo_regret);

  const auto serial = run_experiment_serial(cfg);
  const auto parallel = run_experiment(cfg);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t r = 0; r < serial.size(); ++r) {
    CHECK(serial[r].pseudo_regret == parallel[r].pseudo_regret);
    CHECK(serial[r].comparator_loss == parallel[r].comparator_loss);
  }
  CHECK(a.theorem_bound == theorem_bound_comb(tune_semibandit(2, 4, 300, bound_for(cfg).total_missing, 2)));
  for (int t = 2; t < 300; ++t) CHECK(a.missing_count[t] == 2);
}

TEST_CASE("expected losses and comparator on a fixed instance") {
  const ExperimentConfig cfg = parse_config(semi_doc(50, 0.2));
  const RegretTrace tr = run_replication(cfg, 0);
  CHECK(tr.comparator_loss.back() == Approx(50 * 0.6));
  for (std::size_t t = 0; t < tr.pseudo_regret.size(); ++t) {
    CHECK(tr.pseudo_regret[t] == Approx(tr.learner_loss[t] - tr.comparator_loss[t]));
    CHECK(tr.pseudo_regret[t] >= -1e-12);
  }
}

TEST_CASE("aggregate") {
  const Summary one = aggregate({trace_of({1.0, 2.0, 3.0})});
  CHECK(one.mean == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(one.q10 == one.q90);
  const Summary flat = aggregate({trace_of({1.0, 1.0}), trace_of({1.0, 1.0}), trace_of({1.0, 1.0})});
  CHECK(flat.q10 == flat.q90);
  const Summary pair = aggregate({trace_of({0.0, 0.0}), trace_of({2.0, 4.0})});
  CHECK(pair.mean == std::vector<double>{1.0, 2.0});
  CHECK(pair.replications == 2);
  CHECK_THROWS_AS(aggregate({}), RejectedInput);
  RegretTrace bad;
  bad.failed = true;
  CHECK_THROWS_AS(aggregate({bad}), RejectedInput);
}

TEST_CASE("export formats") {
  const ExperimentConfig cfg = parse_config(semi_doc(20, 0.1));
  const Summary s = aggregate(run_experiment(cfg));
  const std::string csv = summary_csv(s);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "round,pseudo_regret_mean,pseudo_regret_q10,pseudo_regret_q90,theorem_bound,missing_count,epoch");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 20);
  CHECK(csv.back() == '\n');

  const auto dir = std::filesystem::temp_directory_path() / "dftrl_export_test";
  std::filesystem::remove_all(dir);
  const std::string path = export_summary(s, cfg, dir.string(), ExportFormat::Json);
  std::ifstream f(path);
  const json back = json::parse(f);
  const std::vector<double> mean = back.at("pseudo_regret_mean").get<std::vector<double>>();
  CHECK(mean == s.mean);
  CHECK(back.at("theorem_bound").get<double>() == s.theorem_bound);
  CHECK(back.at("config").at("horizon") == 20);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config validation") {
  json doc = semi_doc(100, 0.1);
  doc["horizon"] = 60000;
  try {
    parse_config(doc);
    FAIL("cap not enforced");
  } catch (const RejectedInput& e) {
    CHECK(std::string(e.what()).find("horizon") != std::string::npos);
  }
  doc = semi_doc(100, 0.1);
  doc["replications"] = 5000;
  CHECK_THROWS_AS(parse_config(doc), RejectedInput);
  doc = semi_doc(100, 0.1);
  doc["environment"]["base"] = {0.5, 0.5};
  CHECK_THROWS_AS(parse_config(doc), RejectedInput);
  doc = semi_doc(100, 0.1);
  doc["delay"] = {{"type", "constant"}, {"d", -1}};
  CHECK_THROWS_AS(parse_config(doc), RejectedInput);
  doc = semi_doc(100, 0.1);
  doc["setting"] = "bogus";
  CHECK_THROWS_AS(parse_config(doc), RejectedInput);

  const ExperimentConfig cfg = parse_config(semi_doc(100, 0.1));
  const ExperimentConfig o = with_overrides(cfg, {{"seed", 99}, {"replications", 7}, {"format", "json"}});
  CHECK(o.seed == 99);
  CHECK(o.replications == 7);
  CHECK(o.format == ExportFormat::Json);
  CHECK(o.horizon == 100);
}

TEST_CASE("doubling runs record epochs") {
  json doc = semi_doc(400, 0.2);
  std::vector<int> delays(400, 1);
  delays[50] = 17;
  doc["delay"] = {{"type", "explicit"}, {"delays", delays}};
  doc["tuning"] = {{"mode", "doubling"}};
  const RegretTrace tr = run_replication(parse_config(doc), 0);
  REQUIRE_FALSE(tr.failed);
  CHECK(tr.epoch.front() == 1);
  CHECK(tr.epoch.back() >= 4);
  CHECK(tr.epoch.back() <= 6);
  for (std::size_t t = 1; t < tr.epoch.size(); ++t) CHECK(tr.epoch[t] >= tr.epoch[t - 1]);
}

TEST_CASE("large explicit rates learn the gap") {
  json doc = semi_doc(2000, 0.2);
  doc["tuning"] = {{"mode", "explicit"}, {"eta", 0.1}, {"gamma", 0.1}};
  const RegretTrace tr = run_replication(parse_config(doc), 0);
  REQUIRE_FALSE(tr.failed);
  CHECK(tr.pseudo_regret.back() < 0.05 * 2000);
  CHECK(tr.pseudo_regret.back() - tr.pseudo_regret[999] < 0.5 * tr.pseudo_regret[999]);
}
