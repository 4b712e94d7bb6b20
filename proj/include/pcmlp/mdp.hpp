#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pcmlp/models.hpp"
#include "pcmlp/rng.hpp"
#include "pcmlp/types.hpp"

namespace pcmlp {

using RewardFn = std::function<double(const State&, const Action&)>;

// Opaque simulator. `mean`, when present, returns the noise-free next state and
// is used only for model-error diagnostics.
struct BlackBoxDynamics {
  std::function<State(const State&, const Action&, Rng&)> sample;
  std::function<State(const State&, const Action&)> mean;
};

using Dynamics = std::variant<BlackBoxDynamics, TransitionModel>;

// Episodic MDP with a fixed initial state.
struct MdpSpec {
  int horizon = 1;
  State initial_state;
  RewardFn reward;
  Dynamics dynamics;
  // Environment rewards are clamped into [0, 1] with a warning. Planner-side
  // MDPs (reward plus bonus) turn this off.
  bool clamp_rewards = true;
};

State step_dynamics(const MdpSpec& mdp, const State& s, const Action& a, Rng& rng);

// Fully explicit finite MDP. Rewards and transition rows are indexed by
// s * n_actions + a. Rewards are not restricted to [0, 1] here because the
// tabular planner also consumes reward-plus-bonus tables.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  int horizon = 1;
  int initial_state = 0;
  std::vector<double> reward;
  std::vector<Vector> transition;

  double r(int s, int a) const { return reward[static_cast<std::size_t>(s * n_actions + a)]; }
  const Vector& p(int s, int a) const { return transition[static_cast<std::size_t>(s * n_actions + a)]; }
  void validate() const;
  MdpSpec to_spec() const;
};

// Reads the reward table and transition rows out of a tabular-evaluable spec.
TabularMdp to_tabular(const MdpSpec& mdp);

// Time-indexed stochastic tabular policy: probs[h] is n_states x n_actions,
// each row a distribution over actions.
class TabularPolicy {
 public:
  TabularPolicy(int horizon, int n_states, int n_actions, std::vector<Matrix> probs);
  static TabularPolicy deterministic(int n_actions, const std::vector<std::vector<int>>& actions);
  static TabularPolicy uniform(int horizon, int n_states, int n_actions);

  int horizon() const { return horizon_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  const Matrix& probs(int h) const { return probs_[static_cast<std::size_t>(h)]; }
  double prob(int h, int s, int a) const { return probs_[static_cast<std::size_t>(h)](s, a); }
  // Action with the largest probability (lowest index on ties).
  int greedy(int h, int s) const;
  int sample(int h, int s, Rng& rng) const;

 private:
  int horizon_;
  int n_states_;
  int n_actions_;
  std::vector<Matrix> probs_;
};

// A policy is a factory of per-episode controllers. Stateful policies (the
// MPPI receding-horizon policy) keep their state inside the controller, so a
// single Policy can be rolled out from several threads at once.
class Policy {
 public:
  using Controller = std::function<Action(const State&, int step, Rng&)>;
  using Factory = std::function<Controller()>;

  Policy(std::string kind, Factory factory);
  static Policy stateless(std::string kind, std::function<Action(const State&, int, Rng&)> fn);
  static Policy tabular(TabularPolicy table);
  // Uniform over the action box [lo, hi]^dim.
  static Policy uniform_box(int action_dim, double lo, double hi);

  Controller begin_episode() const { return factory_(); }
  const std::string& kind() const { return kind_; }
  // Non-null for tabular policies.
  const TabularPolicy* table() const { return table_.get(); }

 private:
  std::string kind_;
  Factory factory_;
  std::shared_ptr<const TabularPolicy> table_;
};

struct Transition {
  State state;
  Action action;
  double reward = 0.0;
  State next_state;
};

struct Trajectory {
  std::vector<Transition> steps;
  double total_reward() const;
};

struct OccupancySample {
  State state;
  Action action;
  int step = 0;
};

Trajectory rollout(const Policy& policy, const MdpSpec& mdp, Rng& rng);

// Draws h uniformly from {0, ..., H-1}, runs the policy for h steps and returns
// (s_h, a_h, h): a draw from the time-averaged occupancy d^pi.
OccupancySample d_pi_sample(const Policy& policy, const MdpSpec& mdp, Rng& rng);

// n samples with per-sample child streams (parallel, thread-count invariant).
std::vector<OccupancySample> d_pi_samples(const Policy& policy, const MdpSpec& mdp, int n, Rng& rng);

// n full rollouts with per-rollout child streams.
std::vector<Trajectory> rollouts(const Policy& policy, const MdpSpec& mdp, int n, Rng& rng);

struct ValueEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

ValueEstimate estimate_value(const Policy& policy, const MdpSpec& mdp, int n_rollouts, Rng& rng);
ValueEstimate summarize_returns(const std::vector<double>& returns);

// Exact J(pi; r, P) by backward induction.
double exact_value_tabular(const TabularPolicy& policy, const TabularMdp& mdp);
double exact_value_tabular(const Policy& policy, const MdpSpec& mdp);

// V[h](s) for h = 0..H (V[H] = 0) under the policy.
std::vector<Vector> policy_values(const TabularPolicy& policy, const TabularMdp& mdp);

// d_h^pi as n_states x n_actions matrices for h = 0..H-1, by forward recursion.
std::vector<Matrix> exact_occupancy(const TabularPolicy& policy, const TabularMdp& mdp);
// d^pi = (1/H) sum_h d_h^pi.
Matrix exact_average_occupancy(const TabularPolicy& policy, const TabularMdp& mdp);

struct SimulationGap {
  double lhs = 0.0;  // J(pi; r_hat, P_hat) - J(pi; r, P)
  double rhs = 0.0;  // sum_h E_{d_h^pi}[r_hat - r + (P_hat - P) . V_hat_{h+1}]
};

// Both sides of the simulation lemma computed exactly. `model` supplies r_hat
// and P_hat; occupancies are taken under `truth`.
SimulationGap simulation_gap(const TabularPolicy& policy, const TabularMdp& truth, const TabularMdp& model);

}  // namespace pcmlp
