#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pcmlp/mdp.hpp"

namespace pcmlp {

// ---- MPPI ----------------------------------------------------------------

struct MppiConfig {
  int K = 200;            // perturbation sequences per step
  int T = 30;             // shooting horizon
  double lambda = 0.2;    // temperature
  double noise = 0.3;     // Sigma = noise * I unless `sigma` is set
  int iterations = 1;     // sample-and-update rounds per control step
  Matrix sigma;           // action-noise covariance (optional)
  int action_dim = 1;
  // Actions sent to the model are clipped to [action_lo, action_hi].
  double action_lo = -std::numeric_limits<double>::infinity();
  double action_hi = std::numeric_limits<double>::infinity();
  // Stop the shooting horizon at the end of the episode.
  bool clip_to_episode = true;

  Matrix covariance() const;
  void validate() const;
};

// Deterministic model prediction used inside the planner.
using ModelStep = std::function<State(const State&, const Action&)>;

struct MppiStepResult {
  Action action;                     // a_0 after the update (clipped)
  Vector costs;                      // S(E^k)
  Vector weights;                    // w(E^k), summing to 1
  std::vector<Matrix> perturbations; // E^k, action_dim x horizon used
  Matrix nominal_before;             // action_dim x T, before the last round
  Matrix nominal_updated;            // after the last round, before the shift
};

class MppiPlanner {
 public:
  MppiPlanner(MppiConfig cfg, ModelStep model, RewardFn reward);

  // One receding-horizon step from s. `steps_remaining` < 0 means unlimited.
  MppiStepResult step(const State& s, Rng& rng, int steps_remaining = -1);
  void reset();

  const Matrix& nominal() const { return nominal_; }
  void set_nominal(Matrix nominal);
  const MppiConfig& config() const { return cfg_; }

 private:
  MppiConfig cfg_;
  ModelStep model_;
  RewardFn reward_;
  Matrix sigma_lower_;
  Eigen::LLT<Matrix> sigma_llt_;
  Matrix nominal_;
};

MppiStepResult mppi_step(MppiPlanner& planner, const State& s, Rng& rng, int steps_remaining = -1);

// Receding-horizon policy. Each episode starts from a zero nominal sequence.
Policy mppi_policy(const MppiConfig& cfg, ModelStep model, RewardFn reward, int horizon);

// Noise-free prediction from a KNR or black-box model.
ModelStep mean_model(const TransitionModel& model);
ModelStep mean_model(const BlackBoxDynamics& dynamics);

// ---- Tabular ---------------------------------------------------------------

struct TabularPlan {
  TabularPolicy policy;
  std::vector<Vector> values;  // V[h] for h = 0..H
  double value = 0.0;          // V[0](s_0)
};

// Backward induction; deterministic time-indexed argmax with lowest-index ties.
TabularPlan tabular_plan(const TabularMdp& mdp);
TabularPlan tabular_plan(const MdpSpec& mdp);

// Every time-indexed deterministic policy (n_actions^(n_states * H) of them).
std::vector<TabularPolicy> enumerate_deterministic_policies(int n_states, int n_actions, int horizon,
                                                            std::size_t limit = 1u << 20);

struct SearchResult {
  std::size_t index = 0;
  double value = 0.0;
};

// argmax of exact value over an explicit policy list; lowest index on ties.
SearchResult exhaustive_policy_search(const TabularMdp& mdp, std::span<const TabularPolicy> policies);

struct OptimisticPlan {
  TabularPolicy policy;
  std::size_t model = 0;  // index into the candidate list
  double value = 0.0;
};

// Joint argmax over (model, policy) of V^pi_P for the models listed in
// `members`. With no policy list the policy is the model's exact optimum.
// Ties go to the lowest (model, policy) pair. Throws ConfidenceRegionEmpty.
OptimisticPlan optimistic_plan(std::span<const TabularMdp> models, std::span<const std::size_t> members,
                               std::span<const TabularPolicy> policies = {});

}  // namespace pcmlp
