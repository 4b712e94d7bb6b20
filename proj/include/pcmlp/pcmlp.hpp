#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcmlp/cover.hpp"
#include "pcmlp/envs.hpp"
#include "pcmlp/mle.hpp"
#include "pcmlp/planners.hpp"

namespace pcmlp {

enum class ModelFamily { kKnr, kLinMdp };
enum class PlannerKind { kMppi, kTabular };
enum class CSchedule { kExplicit, kTheoreticalKnr, kTheoreticalLinmdp };
enum class Fitter { kSgd, kLeastSquares };
// kTruncated: every occupancy sample is a fresh rollout prefix of uniform
// length. kTrajectory: each policy is rolled out a fixed number of times and
// occupancy samples are drawn uniformly from the recorded transitions.
enum class SamplingMode { kTruncated, kTrajectory };

struct PcmlpConfig {
  int N = 15;                  // iterations
  int K = 200;                 // covariance samples per policy
  int M = 500;                 // model-fitting samples per iteration
  double lambda = 0.01;
  double bonus_scale = 1.0;    // C
  CSchedule schedule = CSchedule::kExplicit;
  double eps_stat = -1.0;      // < 0: measured model error
  double delta = 0.1;          // confidence level used by schedules and bounds
  BonusForm bonus_form = BonusForm::kMainText;
  PlannerKind planner = PlannerKind::kMppi;
  ModelFamily family = ModelFamily::kKnr;
  Fitter fitter = Fitter::kLeastSquares;
  Projection projection = Projection::kFrobenius;
  double ridge = 1e-3;
  double F = 0.0;              // <= 0: the true model's norm if known, else 100
  double model_sigma = -1.0;   // < 0: the true noise if known, else 0
  SamplingMode sampling = SamplingMode::kTrajectory;
  int rollouts_per_policy = 4;
  int eval_rollouts = 16;      // truncated mode, continuous envs
  int model_value_rollouts = 1;
  int probe_count = 256;
  int model_error_samples = 256;
  bool reward_free = false;
  MppiConfig mppi;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  std::optional<double> model_error;
  double bonus_min = 0.0;
  double bonus_mean = 0.0;
  double bonus_max = 0.0;
  std::optional<double> plan_value_model;
  double value_true_mean = 0.0;
  double value_true_se = 0.0;
  double avg_bonus_per_step = 0.0;
  double info_gain = 0.0;
  std::optional<double> coverage;
  std::optional<bool> feasible;
  // Not part of the CSV.
  double c = 0.0;
  double eps_stat = 0.0;
  bool goal_reached = false;
};

struct PcmlpResult {
  PolicyCover cover;
  std::vector<IterationRecord> records;
  int best_iteration = 0;      // record index + 1 of the best evaluated policy
  double best_value = 0.0;
  std::optional<int> first_goal_iteration;
};

PcmlpResult run_pcmlp(const PcmlpConfig& cfg, const EnvInstance& env);

// Linear MDP: c = H sqrt(lambda d + N eps_stat).
// KNR:        c = (H / sigma) sqrt(4 lambda F^2 + N eps_stat).
double schedule_c(ModelFamily family, int H, int d, double F, double sigma, double lambda, int N, double eps_stat);

struct TheoreticalSchedule {
  double N = 0.0;
  double M = 0.0;
  double K = 0.0;
  double c = 0.0;
};

// Closed-form hyperparameters that guarantee an epsilon-optimal policy. The
// numbers are far beyond desk scale; they are reported, not run.
TheoreticalSchedule theoretical_linmdp_schedule(double epsilon, double delta, int H, int d, std::size_t n_models);
TheoreticalSchedule theoretical_knr_schedule(double epsilon, double delta, int H, int d, int d_s, double F,
                                             double sigma);

struct RegretSummary {
  std::vector<double> cumulative_regret;
  std::vector<double> cumulative_bonus;  // sum of per-step bonus expectations
  std::vector<double> bound;             // 6 H^2 cumulative_bonus + H
  bool within_bound = true;
};

RegretSummary regret_diagnostic(const std::vector<IterationRecord>& records, double v_star, int horizon);

}  // namespace pcmlp
