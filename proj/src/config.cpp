#include "dftrl/config.hpp"

#include <fstream>
#include <sstream>

#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"
#include "dftrl/linear_bandit.hpp"

namespace dftrl {

using detail::Overloaded;
using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& msg) { throw RejectedInput("config: " + msg); }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) reject(where + "." + key + " is required");
  return j.at(key);
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return field(j, key, where).get<T>();
  } catch (const json::exception&) {
    reject(where + "." + key + " has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

void cap(bool ok, const std::string& what, long long value, long long limit) {
  if (!ok) {
    std::ostringstream os;
    os << "desk-scale cap exceeded: " << what << " = " << value << " > " << limit;
    throw RejectedInput(os.str());
  }
}

Eigen::VectorXd vector_of(const json& j, const std::string& where) {
  if (!j.is_array()) reject(where + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) reject(where + " must be an array of numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

// Rows of the JSON array become rows of the matrix.
Eigen::MatrixXd matrix_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) reject(where + " must be a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) reject(where + " rows must be non-empty arrays");
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) reject(where + " rows must have equal length");
    m.row(r) = vector_of(j[r], where).transpose();
  }
  return m;
}

Setting parse_setting(const std::string& s) {
  if (s == "semi_bandit") return Setting::SemiBandit;
  if (s == "mdp") return Setting::Mdp;
  if (s == "linear") return Setting::Linear;
  reject("unknown setting '" + s + "' (expected semi_bandit, mdp or linear)");
}

DelaySchedule::Variant parse_delay(const json& j, std::uint64_t default_seed, int horizon) {
  const std::string type = get<std::string>(j, "type", "delay");
  if (type == "constant") {
    const int d = get<int>(j, "d", "delay");
    if (d < 0) reject("delay.d must be >= 0");
    return ConstantDelay{d};
  }
  if (type == "explicit") {
    const auto d = get<std::vector<int>>(j, "delays", "delay");
    if (static_cast<int>(d.size()) != horizon) reject("delay.delays must have one entry per round");
    return ExplicitDelays{d};
  }
  if (type == "uniform" || type == "geometric") {
    SeededRandomDelay r;
    r.seed = get_or<std::uint64_t>(j, "seed", default_seed, "delay");
    if (type == "uniform") {
      r.distribution = DelayDistribution::Uniform;
      r.low = get<int>(j, "low", "delay");
      r.high = get<int>(j, "high", "delay");
    } else {
      r.distribution = DelayDistribution::Geometric;
      r.p = get<double>(j, "p", "delay");
      r.high = get<int>(j, "high", "delay");
    }
    return r;
  }
  reject("unknown delay.type '" + type + "'");
}

Tuning parse_tuning(const json& j) {
  Tuning t;
  const std::string mode = get_or<std::string>(j, "mode", "auto", "tuning");
  if (mode == "auto") {
    t.mode = TuningMode::Auto;
  } else if (mode == "explicit") {
    t.mode = TuningMode::Explicit;
    t.eta = get<double>(j, "eta", "tuning");
    t.gamma = get<double>(j, "gamma", "tuning");
    if (!(t.eta > 0.0) || !(t.gamma > 0.0)) reject("tuning.eta and tuning.gamma must be positive");
  } else if (mode == "doubling") {
    t.mode = TuningMode::Doubling;
  } else {
    reject("unknown tuning.mode '" + mode + "'");
  }
  return t;
}

CombActionSet parse_comb(const json& j) {
  const std::string type = get<std::string>(j, "type", "domain");
  if (type == "m_sets") {
    const int k = get<int>(j, "dim", "domain"), b = get<int>(j, "budget", "domain");
    cap(k <= DeskCaps::max_dim, "domain.dim", k, DeskCaps::max_dim);
    return CombActionSet(MSets{k, b});
  }
  if (type == "vertices") {
    // One action per JSON row; stored one per column.
    const Eigen::MatrixXd rows = matrix_of(field(j, "vertices", "domain"), "domain.vertices");
    cap(rows.cols() <= DeskCaps::max_dim, "domain.dim", rows.cols(), DeskCaps::max_dim);
    cap(rows.rows() <= DeskCaps::max_vertices, "domain.vertices", rows.rows(), DeskCaps::max_vertices);
    CombActionSet set(ExplicitVertices{rows.transpose()});
    (void)set.domain();
    return set;
  }
  reject("unknown semi-bandit domain.type '" + type + "'");
}

MdpSpec parse_mdp(const json& j, int horizon) {
  const int s = get<int>(j, "states", "domain"), a = get<int>(j, "actions", "domain"),
            h = get<int>(j, "layers", "domain");
  cap(s <= DeskCaps::max_states, "domain.states", s, DeskCaps::max_states);
  cap(a <= DeskCaps::max_actions, "domain.actions", a, DeskCaps::max_actions);
  cap(h <= DeskCaps::max_layers, "domain.layers", h, DeskCaps::max_layers);
  if (s < 1 || a < 1 || h < 1) reject("domain.states, domain.actions and domain.layers must be >= 1");
  MdpSpec spec;
  if (j.contains("transitions")) {
    spec.states = s;
    spec.actions = a;
    spec.horizon = h;
    spec.episodes = horizon;
    spec.transitions = vector_of(j.at("transitions"), "domain.transitions");
  } else {
    spec = random_mdp(s, a, h, horizon, get<std::uint64_t>(j, "seed", "domain"));
  }
  spec.initial_state = get_or<int>(j, "initial_state", 0, "domain");
  spec.validate();
  return spec;
}

DomainSpec parse_linear(const json& j) {
  const std::string type = get<std::string>(j, "type", "domain");
  if (type == "ball") {
    const int k = get<int>(j, "dim", "domain");
    cap(k <= DeskCaps::max_dim, "domain.dim", k, DeskCaps::max_dim);
    const double r = get_or<double>(j, "radius", 1.0, "domain");
    if (k < 1 || !(r > 0.0)) reject("ball domain needs dim >= 1 and radius > 0");
    return DomainSpec(Ball{k, r});
  }
  if (type == "polytope") {
    const Eigen::MatrixXd a = matrix_of(field(j, "a", "domain"), "domain.a");
    const Eigen::VectorXd b = vector_of(field(j, "b", "domain"), "domain.b");
    cap(a.cols() <= DeskCaps::max_dim, "domain.dim", a.cols(), DeskCaps::max_dim);
    cap(a.rows() <= DeskCaps::max_polytope_rows, "domain.rows", a.rows(), DeskCaps::max_polytope_rows);
    if (b.size() != a.rows()) reject("domain.b must have one entry per row of domain.a");
    return DomainSpec(Polytope{a, b});
  }
  reject("unknown linear domain.type '" + type + "'");
}

CoordinateLaw parse_law(const json& j) {
  CoordinateLaw law;
  const std::string dist = get<std::string>(j, "dist", "environment.coordinates[]");
  if (dist == "bernoulli") {
    law.kind = CoordinateLaw::Kind::Bernoulli;
    law.mean = get<double>(j, "mean", "environment.coordinates[]");
  } else if (dist == "uniform") {
    law.kind = CoordinateLaw::Kind::Uniform;
    law.low = get<double>(j, "low", "environment.coordinates[]");
    law.high = get<double>(j, "high", "environment.coordinates[]");
  } else {
    reject("unknown coordinate dist '" + dist + "'");
  }
  return law;
}

std::shared_ptr<const LossGenerator> parse_environment(const json& j, const ExperimentConfig& cfg) {
  const std::string type = get<std::string>(j, "type", "environment");
  const std::uint64_t seed = get_or<std::uint64_t>(j, "seed", cfg.seed, "environment");
  auto make = [](LossGenerator::Variant v) { return std::make_shared<const LossGenerator>(std::move(v)); };
  if (type == "fixed_gap")
    return make(FixedGap{vector_of(field(j, "base", "environment"), "environment.base"),
                         get_or<double>(j, "gap", 0.0, "environment"),
                         get_or<std::vector<int>>(j, "best", {}, "environment")});
  if (type == "block_repetition")
    return make(BlockRepetition{parse_environment(field(j, "inner", "environment"), cfg),
                                get<int>(j, "block", "environment")});
  if (type == "shifting_phases") {
    ShiftingPhases p;
    for (const auto& ph : field(j, "phases", "environment"))
      p.phases.push_back({get<int>(ph, "start", "environment.phases[]"),
                          vector_of(field(ph, "loss", "environment.phases[]"), "environment.phases[].loss")});
    return make(std::move(p));
  }
  if (type == "seeded_iid") {
    SeededIID s;
    s.seed = seed;
    for (const auto& c : field(j, "coordinates", "environment")) s.laws.push_back(parse_law(c));
    return make(std::move(s));
  }
  if (type == "lower_bound") {
    const auto* comb = std::get_if<CombActionSet>(&cfg.problem);
    if (!comb) reject("environment lower_bound needs a semi-bandit domain");
    return std::make_shared<const LossGenerator>(make_lower_bound_env(get<int>(j, "block", "environment"),
                                                                      comb->budget(), comb->dim(), cfg.horizon,
                                                                      seed, get_or<double>(j, "gap", 0.1, "environment")));
  }
  if (type == "mdp_random") {
    const auto* spec = std::get_if<MdpSpec>(&cfg.problem);
    if (!spec) reject("environment mdp_random needs an mdp domain");
    return make(MdpRandomLosses{spec->horizon, spec->states, spec->actions, seed,
                                get_or<bool>(j, "iid", false, "environment")});
  }
  if (type == "linear_drift")
    return make(LinearDrift{vector_of(field(j, "theta", "environment"), "environment.theta"),
                            get_or<double>(j, "noise", 0.0, "environment"), seed});
  reject("unknown environment.type '" + type + "'");
}

}  // namespace

const char* to_string(Setting s) {
  switch (s) {
    case Setting::SemiBandit:
      return "semi_bandit";
    case Setting::Mdp:
      return "mdp";
    case Setting::Linear:
      return "linear";
  }
  return "?";
}

const char* to_string(TuningMode m) {
  switch (m) {
    case TuningMode::Auto:
      return "auto";
    case TuningMode::Explicit:
      return "explicit";
    case TuningMode::Doubling:
      return "doubling";
  }
  return "?";
}

LossRange ExperimentConfig::loss_range() const {
  switch (setting) {
    case Setting::SemiBandit:
      return LossRange::Signed;
    case Setting::Mdp:
      return LossRange::Unit;
    case Setting::Linear:
      return LossRange::Ball;
  }
  return LossRange::Signed;
}

int ExperimentConfig::loss_dim() const {
  return std::visit(Overloaded{[](const std::monostate&) { return 0; },
                               [](const CombActionSet& c) { return c.dim(); },
                               [](const MdpSpec& m) { return m.layout().loss_size(); },
                               [](const DomainSpec& d) { return d.dim(); }},
                    problem);
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) reject("top level must be an object");
  ExperimentConfig cfg;
  cfg.source = doc;
  cfg.setting = parse_setting(get<std::string>(doc, "setting", "config"));
  cfg.horizon = get<int>(doc, "horizon", "config");
  if (cfg.horizon < 1) reject("horizon must be >= 1");
  cap(cfg.horizon <= DeskCaps::max_horizon, "horizon", cfg.horizon, DeskCaps::max_horizon);
  cfg.replications = get_or<int>(doc, "replications", 1, "config");
  if (cfg.replications < 1) reject("replications must be >= 1");
  cap(cfg.replications <= DeskCaps::max_replications, "replications", cfg.replications, DeskCaps::max_replications);
  cfg.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
  cfg.delay = parse_delay(field(doc, "delay", "config"), cfg.seed, cfg.horizon);
  (void)DelaySchedule(cfg.delay, cfg.horizon);
  cfg.tuning = parse_tuning(doc.value("tuning", json::object()));

  const json& dom = field(doc, "domain", "config");
  switch (cfg.setting) {
    case Setting::SemiBandit:
      cfg.problem = parse_comb(dom);
      break;
    case Setting::Mdp:
      cfg.problem = parse_mdp(dom, cfg.horizon);
      break;
    case Setting::Linear: {
      DomainSpec d = parse_linear(dom);
      (void)barrier_for(d);
      cfg.problem = std::move(d);
      break;
    }
  }

  cfg.environment = parse_environment(field(doc, "environment", "config"), cfg);
  if (cfg.environment->dim() != cfg.loss_dim()) reject("environment dimension does not match the domain");

  if (doc.contains("output")) {
    const json& out = doc.at("output");
    cfg.output_dir = get_or<std::string>(out, "dir", ".", "output");
    const std::string fmt = get_or<std::string>(out, "format", "csv", "output");
    if (fmt == "csv")
      cfg.format = ExportFormat::Csv;
    else if (fmt == "json")
      cfg.format = ExportFormat::Json;
    else
      reject("output.format must be csv or json");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RejectedInput("config: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw RejectedInput(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig with_overrides(const ExperimentConfig& cfg, const json& overrides) {
  json doc = cfg.source;
  if (overrides.contains("seed")) doc["seed"] = overrides.at("seed");
  if (overrides.contains("replications")) doc["replications"] = overrides.at("replications");
  if (overrides.contains("dir")) doc["output"]["dir"] = overrides.at("dir");
  if (overrides.contains("format")) doc["output"]["format"] = overrides.at("format");
  return parse_config(doc);
}

}  // namespace dftrl
