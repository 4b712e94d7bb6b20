#include "pcmlp/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pcmlp/errors.hpp"

namespace pcmlp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& name, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError(name + ": expected a number, got '" + text + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& name, const std::string& text) {
  const std::string t = trim(text);
  Int v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError(name + ": expected an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& name, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(name + ": expected true or false, got '" + text + "'");
}

template <class E>
using Names = std::vector<std::pair<E, const char*>>;

template <class E>
std::string enum_name(const Names<E>& names, E v) {
  for (const auto& [e, n] : names) {
    if (e == v) return n;
  }
  return "?";
}

template <class E>
E parse_enum(const std::string& name, const Names<E>& names, const std::string& text) {
  const std::string t = trim(text);
  std::string options;
  for (const auto& [e, n] : names) {
    if (t == n) return e;
    options += options.empty() ? n : std::string(", ") + n;
  }
  throw ConfigError(name + ": unknown value '" + t + "' (expected one of " + options + ")");
}

const Names<CSchedule> kSchedules = {{CSchedule::kExplicit, "explicit"},
                                     {CSchedule::kTheoreticalKnr, "theoretical-knr"},
                                     {CSchedule::kTheoreticalLinmdp, "theoretical-linmdp"}};
const Names<BonusForm> kForms = {{BonusForm::kMainText, "main"}, {BonusForm::kLemma, "lemma"}};
const Names<PlannerKind> kPlanners = {{PlannerKind::kMppi, "mppi"}, {PlannerKind::kTabular, "tabular"}};
const Names<ModelFamily> kFamilies = {{ModelFamily::kKnr, "knr"}, {ModelFamily::kLinMdp, "linmdp"}};
const Names<Fitter> kFitters = {{Fitter::kSgd, "sgd"}, {Fitter::kLeastSquares, "least-squares"}};
const Names<Projection> kProjections = {{Projection::kFrobenius, "frobenius"}, {Projection::kSpectral, "spectral"}};
const Names<SamplingMode> kSampling = {{SamplingMode::kTrajectory, "trajectory"}, {SamplingMode::kTruncated, "truncated"}};

struct Field {
  ConfigKey id;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class T, class Access>
Field make_field(std::string section, std::string key, std::string doc, Access access) {
  const std::string name = section + "." + key;
  Field f;
  f.id = {section, key, doc};
  f.get = [access](const RunConfig& c) -> std::string {
    const T& v = access(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, double>) {
      return fmt_double(v);
    } else if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt_double(v[i]);
      return out;
    } else {
      return std::to_string(v);
    }
  };
  f.set = [access, name](RunConfig& c, const std::string& text) {
    T& v = access(c);
    if constexpr (std::is_same_v<T, double>) {
      v = parse_double(name, text);
    } else if constexpr (std::is_same_v<T, bool>) {
      v = parse_bool(name, text);
    } else if constexpr (std::is_same_v<T, std::string>) {
      v = trim(text);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      v.clear();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!trim(item).empty()) v.push_back(parse_double(name, item));
      }
    } else {
      v = parse_int<T>(name, text);
    }
  };
  return f;
}

template <class E, class Access>
Field make_enum(std::string section, std::string key, std::string doc, const Names<E>& names, Access access) {
  const std::string name = section + "." + key;
  Field f;
  f.id = {section, key, doc};
  f.get = [access, &names](const RunConfig& c) { return enum_name(names, access(const_cast<RunConfig&>(c))); };
  f.set = [access, &names, name](RunConfig& c, const std::string& text) { access(c) = parse_enum(name, names, text); };
  return f;
}

#define PCMLP_FIELD(T, sec, key, doc, expr) make_field<T>(sec, key, doc, [](RunConfig& c) -> T& { return expr; })
#define PCMLP_ENUM(E, sec, key, doc, names, expr) \
  make_enum<E>(sec, key, doc, names, [](RunConfig& c) -> E& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      PCMLP_FIELD(std::string, "run", "experiment", "single | bonus-decay | ablation | coverage | optimism | odpc",
                  c.experiment),
      PCMLP_FIELD(std::string, "run", "env", "linear-system | sparse-hill | tabular-linmdp | chain", c.env),
      PCMLP_FIELD(std::string, "run", "algorithm", "pcmlp | odpc (single runs)", c.algorithm),
      PCMLP_FIELD(std::uint64_t, "run", "seed", "64-bit run seed", c.seed),
      PCMLP_FIELD(std::string, "run", "out", "output directory", c.out),
      PCMLP_FIELD(std::vector<double>, "run", "sweep", "bonus scales for ablation and coverage", c.sweep),

      PCMLP_FIELD(int, "pcmlp", "N", "iterations", c.pcmlp.N),
      PCMLP_FIELD(int, "pcmlp", "K", "covariance samples per policy", c.pcmlp.K),
      PCMLP_FIELD(int, "pcmlp", "M", "model-fitting samples per iteration", c.pcmlp.M),
      PCMLP_FIELD(double, "pcmlp", "lambda", "covariance regularizer", c.pcmlp.lambda),
      PCMLP_FIELD(double, "pcmlp", "bonus_scale", "bonus scale C", c.pcmlp.bonus_scale),
      PCMLP_ENUM(CSchedule, "pcmlp", "schedule", "explicit | theoretical-knr | theoretical-linmdp", kSchedules,
                 c.pcmlp.schedule),
      PCMLP_FIELD(double, "pcmlp", "eps_stat", "model error for schedules; negative: measured", c.pcmlp.eps_stat),
      PCMLP_FIELD(double, "pcmlp", "delta", "confidence level", c.pcmlp.delta),
      PCMLP_ENUM(BonusForm, "pcmlp", "bonus_form", "main | lemma", kForms, c.pcmlp.bonus_form),
      PCMLP_ENUM(PlannerKind, "pcmlp", "planner", "mppi | tabular", kPlanners, c.pcmlp.planner),
      PCMLP_ENUM(ModelFamily, "pcmlp", "family", "knr | linmdp", kFamilies, c.pcmlp.family),
      PCMLP_ENUM(Fitter, "pcmlp", "fitter", "sgd | least-squares", kFitters, c.pcmlp.fitter),
      PCMLP_ENUM(Projection, "pcmlp", "projection", "frobenius | spectral", kProjections, c.pcmlp.projection),
      PCMLP_FIELD(double, "pcmlp", "ridge", "least-squares ridge", c.pcmlp.ridge),
      PCMLP_FIELD(double, "pcmlp", "F", "weight norm budget; <= 0: from the env", c.pcmlp.F),
      PCMLP_FIELD(double, "pcmlp", "model_sigma", "model noise; negative: from the env", c.pcmlp.model_sigma),
      PCMLP_ENUM(SamplingMode, "pcmlp", "sampling", "trajectory | truncated", kSampling, c.pcmlp.sampling),
      PCMLP_FIELD(int, "pcmlp", "rollouts_per_policy", "real rollouts per policy (trajectory sampling)",
                  c.pcmlp.rollouts_per_policy),
      PCMLP_FIELD(int, "pcmlp", "eval_rollouts", "evaluation rollouts (truncated sampling)", c.pcmlp.eval_rollouts),
      PCMLP_FIELD(int, "pcmlp", "model_value_rollouts", "planner rollouts inside the model; 0 disables",
                  c.pcmlp.model_value_rollouts),
      PCMLP_FIELD(int, "pcmlp", "probe_count", "fixed probe pairs for bonus statistics", c.pcmlp.probe_count),
      PCMLP_FIELD(int, "pcmlp", "model_error_samples", "held-out samples for model error",
                  c.pcmlp.model_error_samples),
      PCMLP_FIELD(bool, "pcmlp", "reward_free", "plan on the bonus alone", c.pcmlp.reward_free),

      PCMLP_FIELD(int, "mppi", "K", "sampled sequences", c.pcmlp.mppi.K),
      PCMLP_FIELD(int, "mppi", "T", "shooting horizon", c.pcmlp.mppi.T),
      PCMLP_FIELD(double, "mppi", "lambda", "temperature", c.pcmlp.mppi.lambda),
      PCMLP_FIELD(double, "mppi", "noise", "action noise variance (Sigma = noise I)", c.pcmlp.mppi.noise),
      PCMLP_FIELD(int, "mppi", "iterations", "sample-and-update rounds per step", c.pcmlp.mppi.iterations),
      PCMLP_FIELD(bool, "mppi", "clip_to_episode", "stop the shooting horizon at the episode end",
                  c.pcmlp.mppi.clip_to_episode),

      PCMLP_FIELD(int, "odpc", "N", "iterations", c.odpc.N),
      PCMLP_FIELD(int, "odpc", "M", "samples per dataset", c.odpc.M),
      PCMLP_FIELD(double, "odpc", "delta", "confidence level for the radius", c.odpc.delta),
      PCMLP_FIELD(double, "odpc", "radius", "confidence radius; negative: derived from delta", c.odpc.radius),

      PCMLP_FIELD(int, "linear_system", "state_dim", "state dimension", c.linear_system.state_dim),
      PCMLP_FIELD(int, "linear_system", "action_dim", "action dimension", c.linear_system.action_dim),
      PCMLP_FIELD(double, "linear_system", "sigma", "transition noise", c.linear_system.sigma),
      PCMLP_FIELD(int, "linear_system", "horizon", "episode length", c.linear_system.horizon),
      PCMLP_FIELD(double, "linear_system", "a_norm", "spectral norm of A", c.linear_system.a_norm),
      PCMLP_FIELD(double, "linear_system", "b_norm", "spectral norm of B", c.linear_system.b_norm),
      PCMLP_FIELD(double, "linear_system", "feature_radius", "feature normalization radius",
                  c.linear_system.feature_radius),
      PCMLP_FIELD(double, "linear_system", "start", "initial state is start * e1", c.linear_system.start),
      PCMLP_FIELD(double, "linear_system", "reward_radius", "reward is 1 - min(1, |s|^2 / rho^2)",
                  c.linear_system.reward_radius),
      PCMLP_FIELD(int, "linear_system", "bonus_rff_dim", "RFF bonus features; 0: model features",
                  c.linear_system.bonus_rff_dim),
      PCMLP_FIELD(double, "linear_system", "bonus_bandwidth", "RFF bandwidth", c.linear_system.bonus_bandwidth),

      PCMLP_FIELD(double, "sparse_hill", "power", "action gain", c.sparse_hill.power),
      PCMLP_FIELD(double, "sparse_hill", "gravity", "slope gain", c.sparse_hill.gravity),
      PCMLP_FIELD(double, "sparse_hill", "max_speed", "speed limit", c.sparse_hill.max_speed),
      PCMLP_FIELD(double, "sparse_hill", "goal_x", "goal position", c.sparse_hill.goal_x),
      PCMLP_FIELD(double, "sparse_hill", "start_x", "start position", c.sparse_hill.start_x),
      PCMLP_FIELD(int, "sparse_hill", "horizon", "episode length", c.sparse_hill.horizon),
      PCMLP_FIELD(double, "sparse_hill", "noise", "velocity noise", c.sparse_hill.noise),
      PCMLP_FIELD(double, "sparse_hill", "control_weight", "reward scale away from the goal",
                  c.sparse_hill.control_weight),
      PCMLP_FIELD(int, "sparse_hill", "rff_dim", "RFF feature dimension", c.sparse_hill.rff_dim),
      PCMLP_FIELD(double, "sparse_hill", "bandwidth", "RFF bandwidth", c.sparse_hill.bandwidth),

      PCMLP_FIELD(int, "tabular_linmdp", "n_states", "states", c.tabular_linmdp.n_states),
      PCMLP_FIELD(int, "tabular_linmdp", "n_actions", "actions", c.tabular_linmdp.n_actions),
      PCMLP_FIELD(int, "tabular_linmdp", "n_candidates", "candidate models, truth included",
                  c.tabular_linmdp.n_candidates),
      PCMLP_FIELD(int, "tabular_linmdp", "horizon", "episode length", c.tabular_linmdp.horizon),
      PCMLP_FIELD(double, "tabular_linmdp", "tv_gap", "per-row TV from truth to each decoy", c.tabular_linmdp.tv_gap),
      PCMLP_FIELD(double, "tabular_linmdp", "uniform_mix", "uniform mixing of true rows",
                  c.tabular_linmdp.uniform_mix),

      PCMLP_FIELD(int, "chain", "n_states", "chain length", c.chain.n_states),
      PCMLP_FIELD(int, "chain", "horizon", "episode length", c.chain.horizon),
      PCMLP_FIELD(int, "chain", "start", "start state", c.chain.start),
  };
  return all;
}

#undef PCMLP_FIELD
#undef PCMLP_ENUM

const Field& find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (f.id.section == section && f.id.key == key) return f;
  }
  throw ConfigError("unknown config key '" + section + "." + key + "'");
}

}  // namespace

std::vector<ConfigKey> config_keys() {
  std::vector<ConfigKey> out;
  for (const auto& f : fields()) out.push_back(f.id);
  return out;
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config key '" + section + "' must sit inside a [section]");
    }
    for (const auto& [key, value] : body) find_field(section, key).set(cfg, value.data());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' must look like section.key=value");
  const std::string path = trim(assignment.substr(0, eq));
  const auto dot = path.find('.');
  if (dot == std::string::npos) throw ConfigError("override key '" + path + "' must look like section.key");
  find_field(path.substr(0, dot), path.substr(dot + 1)).set(cfg, assignment.substr(eq + 1));
}

std::string get_value(const RunConfig& cfg, const std::string& section, const std::string& key) {
  return find_field(section, key).get(cfg);
}

std::string resolved_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.id.section != section) {
      if (!section.empty()) out << "\n";
      section = f.id.section;
      out << "[" << section << "]\n";
    }
    out << "; " << f.id.doc << "\n" << f.id.key << " = " << f.get(cfg) << "\n";
  }
  return out.str();
}

EnvInstance make_env(const RunConfig& cfg) {
  if (cfg.env == "linear-system") {
    LinearSystemParams p = cfg.linear_system;
    p.seed = cfg.seed;
    return make_linear_system(p);
  }
  if (cfg.env == "sparse-hill") {
    SparseHillParams p = cfg.sparse_hill;
    p.seed = cfg.seed;
    return make_sparse_hill(p);
  }
  if (cfg.env == "tabular-linmdp") {
    TabularLinmdpParams p = cfg.tabular_linmdp;
    p.seed = cfg.seed;
    return make_tabular_linmdp(p);
  }
  if (cfg.env == "chain") return make_chain(cfg.chain);
  throw ConfigError("run.env: unknown environment '" + cfg.env + "'");
}

}  // namespace pcmlp
