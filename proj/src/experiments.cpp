#include "pcmlp/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pcmlp/errors.hpp"

namespace pcmlp {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

PcmlpConfig seeded(const RunConfig& cfg) {
  PcmlpConfig pc = cfg.pcmlp;
  pc.seed = cfg.seed;
  return pc;
}

void append(ExperimentOutput& out, const PcmlpResult& r) {
  for (const auto& rec : r.records) out.rows.push_back(to_row(rec));
}

void describe(ExperimentOutput& out, const std::string& prefix, const PcmlpResult& r) {
  out.summary.emplace_back(prefix + "best_iteration", std::to_string(r.best_iteration));
  out.summary.emplace_back(prefix + "best_value", num(r.best_value));
  const auto& last = r.records.back();
  if (last.coverage) out.summary.emplace_back(prefix + "final_coverage", num(*last.coverage));
  out.summary.emplace_back(prefix + "goal_reached", r.first_goal_iteration ? "true" : "false");
  if (r.first_goal_iteration) out.summary.emplace_back(prefix + "first_goal_iteration", std::to_string(*r.first_goal_iteration));
}

ExperimentOutput run_odpc_experiment(const RunConfig& cfg, const EnvInstance& env) {
  OdpcConfig oc = cfg.odpc;
  oc.seed = cfg.seed;
  const OdpcResult r = run_odpc(oc, env);
  ExperimentOutput out;
  int feasible = 0;
  double best = r.records.front().value_true;
  for (const auto& rec : r.records) {
    out.rows.push_back(to_row(rec));
    feasible += rec.truth_in_region ? 1 : 0;
    best = std::max(best, rec.value_true);
  }
  out.summary.emplace_back("v_star", num(r.v_star));
  out.summary.emplace_back("best_value", num(best));
  out.summary.emplace_back("feasibility_rate", num(static_cast<double>(feasible) / static_cast<double>(r.records.size())));
  out.summary.emplace_back("truth_always_feasible", r.truth_always_feasible ? "true" : "false");
  return out;
}

}  // namespace

double bonus_decay_ratio(const std::vector<IterationRecord>& records) {
  if (records.empty()) throw PreconditionError("bonus_decay_ratio: no records");
  const double first = records.front().avg_bonus_per_step;
  return first > 0 ? records.back().avg_bonus_per_step / first : 0.0;
}

ExperimentOutput run_experiment(const RunConfig& cfg) {
  const EnvInstance env = make_env(cfg);
  const std::string& e = cfg.experiment;
  ExperimentOutput out;

  if (e == "single" || e == "bonus-decay") {
    if (e == "single" && cfg.algorithm == "odpc") return run_odpc_experiment(cfg, env);
    if (cfg.algorithm != "pcmlp" && cfg.algorithm != "odpc") {
      throw ConfigError("run.algorithm: unknown algorithm '" + cfg.algorithm + "'");
    }
    const PcmlpResult r = run_pcmlp(seeded(cfg), env);
    append(out, r);
    describe(out, "", r);
    if (e == "bonus-decay") out.summary.emplace_back("bonus_decay_ratio", num(bonus_decay_ratio(r.records)));
    return out;
  }
  if (e == "ablation" || e == "coverage") {
    if (cfg.sweep.empty()) throw ConfigError("run.sweep: empty sweep");
    for (const double c : cfg.sweep) {
      PcmlpConfig pc = seeded(cfg);
      pc.bonus_scale = c;
      if (e == "coverage") pc.reward_free = true;
      const PcmlpResult r = run_pcmlp(pc, env);
      append(out, r);
      describe(out, "C=" + num(c) + ".", r);
    }
    return out;
  }
  if (e == "optimism") {
    if (!env.table) throw ConfigError("optimism experiment needs a tabular env");
    const PcmlpResult r = run_pcmlp(seeded(cfg), env);
    append(out, r);
    const double v_star = tabular_plan(*env.table).value;
    int optimistic = 0;
    for (const auto& rec : r.records) optimistic += (rec.plan_value_model && *rec.plan_value_model >= v_star - 1e-12) ? 1 : 0;
    const RegretSummary regret = regret_diagnostic(r.records, v_star, env.table->horizon);
    out.summary.emplace_back("v_star", num(v_star));
    out.summary.emplace_back("optimism_rate", num(static_cast<double>(optimistic) / static_cast<double>(r.records.size())));
    out.summary.emplace_back("cumulative_regret", num(regret.cumulative_regret.back()));
    out.summary.emplace_back("cumulative_bonus", num(regret.cumulative_bonus.back()));
    out.summary.emplace_back("regret_bound", num(regret.bound.back()));
    out.summary.emplace_back("regret_within_bound", regret.within_bound ? "true" : "false");
    describe(out, "", r);
    return out;
  }
  if (e == "odpc") return run_odpc_experiment(cfg, env);
  throw ConfigError("run.experiment: unknown experiment '" + e + "'");
}

void write_outputs(const RunConfig& cfg, const ExperimentOutput& out, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw Error("cannot write " + name + " in " + dir);
    f << text;
  };
  write("metrics.csv", emit_metrics(out.rows));
  write("resolved_config.ini", resolved_config(cfg));
  std::string summary;
  for (const auto& [k, v] : out.summary) summary += k + " = " + v + "\n";
  write("summary.txt", summary);
}

}  // namespace pcmlp
