// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pcmlp/config.hpp"
#include "pcmlp/experiments.hpp"
#include "pcmlp/lemmas.hpp"
#include "pcmlp/metrics.hpp"
#include "pcmlp/odpc.hpp"
#include "pcmlp/parallel.hpp"
#include "pcmlp/pcmlp.hpp"

#ifndef PCMLP_CONFIG_DIR
#error "PCMLP_CONFIG_DIR must point at the configs directory"
#endif

namespace {

using namespace pcmlp;

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RunConfig preset(const std::string& name) { return load_config(std::string(PCMLP_CONFIG_DIR) + "/" + name + ".ini"); }

Outcome simulation_lemma() {
  const double gap = simulation_lemma_max_gap(100, kSeed);
  return {gap <= 1e-10, "max |lhs - rhs| = " + fmt("%.3g", gap)};
}

Outcome trace_telescoping() {
  const double slack = trace_telescope_min_slack(100, kSeed);
  return {slack >= -1e-9, "min slack = " + fmt("%.4g", slack)};
}

Outcome sandwich() {
  const SandwichTrials t = sandwich_trials(5, 4, 1.0, 0.05, 100, 100, kSeed);
  return {t.quad_rate >= 0.95 && t.ratio_rate >= 0.95,
          "K = " + std::to_string(t.K) + ", quadratic sandwich in " + fmt("%.0f", 100 * t.quad_rate) +
              "/100 seeds, bonus ratio in [1,4] in " + fmt("%.0f", 100 * t.ratio_rate) + "/100, quad ratios in [" +
              fmt("%.3f", t.worst_low) + ", " + fmt("%.3f", t.worst_high) + "]"};
}

Outcome sgd_decay() {
  const RiskDecay r = sgd_risk_decay(20, 100, 10000, 0.1, kSeed);
  return {r.ratio >= 3.0, "risk " + fmt("%.4g", r.risk_small) + " -> " + fmt("%.4g", r.risk_large) + ", factor " +
                              fmt("%.1f", r.ratio)};
}

Outcome mle_identification() {
  const IdentificationTrials t = mle_identification_trials(100, 4, 0.2, 500, kSeed);
  return {t.rate >= 0.95 && t.min_pairwise_tv >= 0.2 - 1e-9,
          "truth selected in " + fmt("%.0f", 100 * t.rate) + "/100 seeds, min pairwise TV " +
              fmt("%.3f", t.min_pairwise_tv)};
}

Outcome optimism() {
  const OptimismTrials t = optimism_trials(100, 3, kSeed);
  return {t.rate >= 0.95, "optimistic in " + fmt("%.0f", 100 * t.rate) + "/100 seeds, min margin " +
                              fmt("%.4g", t.min_margin) + ", regret within 6H^2 sum(b) + H in " +
                              fmt("%.0f", 100 * t.regret_bound_rate) + "/100"};
}

Outcome bonus_decay() {
  RunConfig cfg = preset("bonus_decay");
  int ok = 0;
  std::string ratios;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    cfg.seed = s;
    cfg.pcmlp.seed = s;
    const PcmlpResult r = run_pcmlp(cfg.pcmlp, make_env(cfg));
    const double ratio = bonus_decay_ratio(r.records);
    ok += (r.records.size() == 15 && ratio <= 0.10) ? 1 : 0;
    ratios += (ratios.empty() ? "" : " ") + fmt("%.3f", ratio);
  }
  return {ok >= 8, std::to_string(ok) + "/10 seeds at <= 10% (ratios " + ratios + ")"};
}

Outcome ablation() {
  RunConfig cfg = preset("ablation");
  int hit5 = 0;
  int hit0 = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    cfg.seed = s;
    const EnvInstance env = make_env(cfg);
    for (const double c : {0.0, 5.0}) {
      PcmlpConfig pc = cfg.pcmlp;
      pc.seed = s;
      pc.bonus_scale = c;
      pc.N = 15;
      const bool reached = run_pcmlp(pc, env).first_goal_iteration.has_value();
      (c > 0 ? hit5 : hit0) += reached ? 1 : 0;
    }
  }
  return {hit5 >= 7 && hit0 <= 2,
          "goal reached: C=5 in " + std::to_string(hit5) + "/10, C=0 in " + std::to_string(hit0) + "/10"};
}

Outcome feasibility() {
  const double rate = feasibility_trials(200, 500, 4, 5, 0.1, kSeed);
  return {rate >= 0.85, "truth in every region in " + fmt("%.1f", 100 * rate) + "% of 200 seeds"};
}

Outcome eluder() {
  const int d0 = eluder_dimension(eluder_singleton_instance(0.1), 8).dimension;
  const int d1 = eluder_dimension(eluder_separated_instance(0.1, 0.3), 8).dimension;
  return {d0 == 0 && d1 == 1, "singleton " + std::to_string(d0) + " (want 0), separated " + std::to_string(d1) +
                                  " (want 1)"};
}

Outcome mppi() {
  const MppiSanity m = mppi_sanity(double_integrator_mppi(), DoubleIntegrator{}, kSeed);
  const double rel = std::abs(m.episode_cost - m.dp_cost) / m.dp_cost;
  return {m.max_weight_error <= 1e-12 && m.max_argmin_gap <= 1e-3 && rel <= 0.10,
          "weight error " + fmt("%.2g", m.max_weight_error) + ", argmin gap " + fmt("%.2g", m.max_argmin_gap) +
              ", episode cost " + fmt("%.4f", m.episode_cost) + " vs DP " + fmt("%.4f", m.dp_cost) + " (" +
              fmt("%.1f", 100 * rel) + "%)"};
}

std::string metrics_bytes(RunConfig cfg, int threads, const std::string& tag) {
  set_thread_count(threads);
  const auto dir = std::filesystem::temp_directory_path() / ("pcmlp_accept_" + tag + "_" + std::to_string(threads));
  write_outputs(cfg, run_experiment(cfg), dir.string());
  std::ifstream f(dir / "metrics.csv", std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  std::filesystem::remove_all(dir);
  return ss.str();
}

Outcome determinism() {
  std::vector<std::pair<std::string, RunConfig>> runs;
  for (const char* name : {"bonus_decay", "optimism", "odpc"}) runs.emplace_back(name, preset(name));
  // The sparse-hill sweeps are shortened; they exercise the same code paths.
  for (const char* name : {"ablation", "coverage"}) {
    RunConfig c = preset(name);
    c.pcmlp.N = 2;
    c.pcmlp.eval_rollouts = 4;
    runs.emplace_back(name, c);
  }
  int same = 0;
  std::string bad;
  for (const auto& [name, cfg] : runs) {
    const std::string a = metrics_bytes(cfg, 1, name);
    const std::string b = metrics_bytes(cfg, 1, name);
    const std::string c = metrics_bytes(cfg, 4, name);
    if (a == b && a == c && !a.empty()) {
      ++same;
    } else {
      bad += " " + name;
    }
  }
  set_thread_count(1);
  return {same == static_cast<int>(runs.size()),
          std::to_string(same) + "/" + std::to_string(runs.size()) +
              " presets byte-identical across reruns and 1 vs 4 threads" + (bad.empty() ? "" : "; differ:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "simulation lemma identity", simulation_lemma},
      {2, "trace telescoping", trace_telescoping},
      {3, "covariance-inverse sandwich", sandwich},
      {4, "SGD risk decay", sgd_decay},
      {5, "exact MLE identification", mle_identification},
      {6, "optimism", optimism},
      {7, "bonus decay", bonus_decay},
      {8, "exploration ablation", ablation},
      {9, "feasibility of the truth", feasibility},
      {10, "eluder brute force", eluder},
      {11, "MPPI sanity", mppi},
      {12, "determinism", determinism},
  };
  // Optional argument: a single criterion number.
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d. %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
