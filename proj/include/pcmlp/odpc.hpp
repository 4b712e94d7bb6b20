#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcmlp/envs.hpp"
#include "pcmlp/planners.hpp"

namespace pcmlp {

// ---- Optimism-driven policy-cover loop --------------------------------------

struct OdpcConfig {
  int N = 5;
  int M = 500;
  double delta = 0.1;
  double radius = -1.0;  // < 0: feasibility_radius(|P|, N, delta, M)
  std::uint64_t seed = 0;
};

// 6 sqrt(ln(2 |P| N / delta) / M) + 2 ln(2 |P| N / delta) / M, the bound on
//   (1/M) sum_{(s,a) in D2} ||P_hat(.|s,a) - P*(.|s,a)||_1^2
// that holds for the true model with probability 1 - delta.
double feasibility_radius(std::size_t n_models, int N, double delta, int M);

struct ConfidenceRegion {
  std::size_t center = 0;                 // MLE index
  double radius = 0.0;
  std::vector<double> statistics;         // one per candidate
  std::vector<std::size_t> members;
  bool empty = false;                     // fell back to {center}
};

// Members are the candidates whose held-out statistic is within the radius.
ConfidenceRegion confidence_region(const LinearMdpModel& model, std::size_t center,
                                   std::span<const std::pair<int, int>> held_out, double radius);

struct OdpcRecord {
  int iter = 0;
  std::size_t mle_index = 0;
  ConfidenceRegion region;
  bool truth_in_region = false;
  std::size_t planned_model = 0;
  double optimistic_value = 0.0;
  double value_true = 0.0;
  double model_error = 0.0;  // exact E ||P_hat - P*||_1^2 under the cover mixture
};

struct OdpcResult {
  std::vector<TabularPolicy> cover;
  std::vector<OdpcRecord> records;
  double v_star = 0.0;
  bool truth_always_feasible = true;
};

// Runs on a tabular linear-MDP env. An empty `policies` list means the
// policy class is every time-indexed deterministic policy.
OdpcResult run_odpc(const OdpcConfig& cfg, const EnvInstance& env, std::span<const TabularPolicy> policies = {});

// ---- Distributional eluder dimension -------------------------------------------

struct EluderInstance {
  TabularMdp context;                        // occupancies are computed here
  std::vector<std::vector<Vector>> models;   // transition rows, s * n_actions + a
  std::vector<TabularPolicy> policies;
  double epsilon = 0.1;

  void validate() const;
};

// Per-policy, per-pair expected TV distance E_{d^pi} TV(P(.|s,a), P'(.|s,a)).
struct EluderTable {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::vector<double>> expected_tv;  // [policy][pair]
};

EluderTable eluder_table(const EluderInstance& instance);

// max over pairs (P, P') with sqrt(sum_{i in prefix} (E_{d^pi_i} TV)^2) <= epsilon
// of E_{d^pi} ||P - P'||_1 (L1 = 2 TV); 0 when no pair is admissible.
double eluder_w_k(const EluderInstance& instance, std::span<const std::size_t> prefix, std::size_t next);
double eluder_w_k(const EluderInstance& instance, const EluderTable& table, std::span<const std::size_t> prefix,
                  std::size_t next);

struct EluderResult {
  int dimension = 0;
  bool capped = false;            // max_length was reached
  bool budget_exceeded = false;   // the value is a lower bound
  std::size_t nodes = 0;
  std::vector<std::size_t> witness;
};

// Longest policy sequence with w_k >= epsilon at every position, by
// depth-first search.
EluderResult eluder_dimension(const EluderInstance& instance, int max_length, bool allow_repeat = true,
                              std::size_t node_budget = 10000);

// JSON instance file; see README for the layout.
EluderInstance load_eluder_instance(const std::string& path);
EluderInstance parse_eluder_instance(const std::string& text);

}  // namespace pcmlp
