#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcmlp/features.hpp"
#include "pcmlp/mdp.hpp"
#include "pcmlp/planners.hpp"

namespace pcmlp {

enum class EnvFamily { kKnr, kLinMdp, kBlackBox, kTabular };
const char* family_name(EnvFamily f);

// Axis-aligned grid over selected state coordinates. Coordinates outside
// [lo, hi] fall into the boundary cells.
struct GridSpec {
  std::vector<int> dims;
  Vector lo;
  Vector hi;
  std::vector<int> bins;

  int cell_count() const;
  int cell(const State& s) const;
};

// Fraction of grid cells holding at least one visited state (every step's
// state plus the final next state).
double coverage_metric(std::span<const Trajectory> trajectories, const GridSpec& grid);

class CoverageTracker {
 public:
  explicit CoverageTracker(GridSpec grid);
  void add(const Trajectory& t);
  double fraction() const;
  const GridSpec& grid() const { return grid_; }

 private:
  GridSpec grid_;
  std::vector<char> seen_;
  int count_ = 0;
};

struct EnvInstance {
  std::string name;
  EnvFamily family = EnvFamily::kBlackBox;
  MdpSpec mdp;  // true environment

  // Continuous envs.
  int state_dim = 0;
  int action_dim = 0;
  double action_lo = 0.0;
  double action_hi = 0.0;
  ModelStep mean_step;                 // noise-free true dynamics
  std::optional<KnrModel> knr_truth;   // KNR envs only

  // Features for the dynamics model and for the bonus (often the same map).
  FeatureMap features = FeatureMap::one_hot(1, 1);
  FeatureMap bonus_features = FeatureMap::one_hot(1, 1);

  // Tabular envs.
  std::optional<TabularMdp> table;
  std::shared_ptr<const LinearMdpModel::Candidates> candidates;  // includes the truth
  std::size_t truth_index = 0;

  std::function<bool(const State&)> goal;  // sparse tasks
  GridSpec grid;                            // coverage grid

  // Uniform random actions: the box for continuous envs, indices otherwise.
  Policy uniform_policy() const;
  bool continuous() const { return family == EnvFamily::kKnr || family == EnvFamily::kBlackBox; }
};

struct LinearSystemParams {
  int state_dim = 2;
  int action_dim = 1;
  double sigma = 0.05;
  int horizon = 20;
  double a_norm = 0.95;      // spectral norm of A
  double b_norm = 1.0;       // spectral norm of B
  double feature_radius = 4.0;
  double start = 0.0;        // s0 = start * e1
  double reward_radius = 1.0;  // reward 1 - min(1, ||s||^2 / rho^2)
  int bonus_rff_dim = 0;     // 0: the bonus uses the model features
  double bonus_bandwidth = 1.0;
  std::uint64_t seed = 0;
};

// s' = A s + B a + sigma eps, written as a KNR with phi(s, a) = z / max(R, ||z||),
// z = (s, a), and W* = R [A B]. Reward 1 - min(1, ||s||^2 / rho^2).
EnvInstance make_linear_system(const LinearSystemParams& p);
EnvInstance make_linear_system(int state_dim, int action_dim, double sigma, std::uint64_t seed);

struct SparseHillParams {
  double power = 0.0135;
  double gravity = 0.0225;
  double max_speed = 0.21;
  double x_min = -1.2;
  double x_max = 0.6;
  double goal_x = 0.45;
  double start_x = -0.5;
  int horizon = 60;
  double noise = 0.0;        // std of velocity noise
  double control_weight = 0.1;
  int rff_dim = 20;
  double bandwidth = 1.0;
  std::uint64_t seed = 0;
};

// Car in a valley. State (x, v), action in [-1, 1]:
//   v' = clip(v + power a - gravity cos(3x), -max_speed, max_speed), x' = clip(x + v').
// Reward 1 at x >= goal_x, otherwise control_weight (1 - a^2).
EnvInstance make_sparse_hill(const SparseHillParams& p);
EnvInstance make_sparse_hill(std::uint64_t seed);

struct TabularLinmdpParams {
  int n_states = 4;
  int n_actions = 2;
  int n_candidates = 4;
  int horizon = 3;
  double tv_gap = 0.25;       // per-row TV between the truth and each decoy
  double uniform_mix = 0.3;   // truth rows are mixed with the uniform law
  std::uint64_t seed = 0;
};

// One-hot linear MDP. The candidate list holds the truth at a random
// position; decoy j moves mass tv_gap of every row onto state (j mod n_states).
EnvInstance make_tabular_linmdp(const TabularLinmdpParams& p);
EnvInstance make_tabular_linmdp(int n_states, int n_actions, int n_candidates, std::uint64_t seed);

struct ChainParams {
  int n_states = 10;
  int horizon = 10;
  int start = 0;
};

// States 0..n-1, action 0 moves left and 1 moves right (walls reflect into
// staying put). Reward 1 at the right end.
EnvInstance make_chain(const ChainParams& p);

struct CatalogEntry {
  std::string name;
  std::string family;
  std::string description;
};

std::vector<CatalogEntry> list_envs();

}  // namespace pcmlp
