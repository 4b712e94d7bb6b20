#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pcmlp/config.hpp"
#include "pcmlp/envs.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/experiments.hpp"
#include "pcmlp/lemmas.hpp"
#include "pcmlp/odpc.hpp"
#include "pcmlp/parallel.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int run_command(const std::string& config_path, const std::string& seed, const std::string& out,
                const std::vector<std::string>& overrides) {
  pcmlp::RunConfig cfg;
  try {
    cfg = pcmlp::load_config(config_path);
    for (const auto& o : overrides) pcmlp::apply_override(cfg, o);
    if (!seed.empty()) pcmlp::apply_override(cfg, "run.seed=" + seed);
    if (!out.empty()) cfg.out = out;
    cfg.pcmlp.validate();
    (void)pcmlp::make_env(cfg);
  } catch (const pcmlp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const pcmlp::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const pcmlp::ExperimentOutput result = pcmlp::run_experiment(cfg);
    pcmlp::write_outputs(cfg, result, cfg.out);
    for (const auto& [k, v] : result.summary) std::cout << k << " = " << v << "\n";
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

int lemmas_command(std::uint64_t seed) {
  bool all = true;
  for (const auto& c : pcmlp::run_lemma_suite(seed)) {
    std::printf("%-28s %s  %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL", c.detail.c_str());
    all = all && c.passed;
  }
  return all ? kOk : kRuntimeError;
}

int list_envs_command() {
  for (const auto& e : pcmlp::list_envs()) {
    std::printf("%-16s %-8s %s\n", e.name.c_str(), e.family.c_str(), e.description.c_str());
  }
  return kOk;
}

int eluder_command(const std::string& path, int max_length, bool no_repeat, int budget) {
  pcmlp::EluderInstance inst;
  try {
    inst = pcmlp::load_eluder_instance(path);
  } catch (const pcmlp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const pcmlp::EluderResult r = pcmlp::eluder_dimension(inst, max_length, !no_repeat, budget);
    std::printf("dimension = %d\n", r.dimension);
    std::printf("capped = %s\n", r.capped ? "true" : "false");
    std::printf("budget_exceeded = %s\n", r.budget_exceeded ? "true" : "false");
    std::printf("nodes = %zu\n", static_cast<std::size_t>(r.nodes));
    std::printf("witness =");
    for (const auto i : r.witness) std::printf(" %zu", static_cast<std::size_t>(i));
    std::printf("\n");
  } catch (const pcmlp::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-cover model-based RL toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  if (const char* env = std::getenv("PCMLP_THREADS")) threads = std::atoi(env);
  app.add_option("--threads", threads, "Worker threads (default: PCMLP_THREADS or 1)");

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path;
  std::string seed;
  std::string out;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "INI config file")->required();
  run->add_option("--seed", seed, "Run seed");
  run->add_option("--out", out, "Output directory");
  run->add_option("--override", overrides, "section.key=value")->take_all();
  run->add_option("--threads", threads, "Worker threads");

  auto* lemmas = app.add_subcommand("lemmas", "Run the lemma diagnostic suite");
  std::uint64_t lemma_seed = 0;
  lemmas->add_option("--seed", lemma_seed, "Seed");
  lemmas->add_option("--threads", threads, "Worker threads");

  app.add_subcommand("list-envs", "Print the environment catalog");

  auto* eluder = app.add_subcommand("eluder", "Brute-force eluder dimension of a JSON instance");
  std::string instance;
  int max_length = 8;
  bool no_repeat = false;
  int budget = 1000000;
  eluder->add_option("--instance", instance, "JSON instance file")->required();
  eluder->add_option("--max-length", max_length, "Longest sequence searched");
  eluder->add_flag("--no-repeat", no_repeat, "Forbid repeating a policy");
  eluder->add_option("--budget", budget, "Node budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  if (threads < 0) {
    std::cerr << "config error: --threads must be >= 0\n";
    return kConfigError;
  }
  if (threads > 0) pcmlp::set_thread_count(threads);

  if (*run) return run_command(config_path, seed, out, overrides);
  if (*lemmas) return lemmas_command(lemma_seed);
  if (*eluder) return eluder_command(instance, max_length, no_repeat, budget);
  return list_envs_command();
}
