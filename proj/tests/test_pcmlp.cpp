#include <gtest/gtest.h>

#include <cmath>

#include "pcmlp/envs.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/pcmlp.hpp"
#include "pcmlp/planners.hpp"

using namespace pcmlp;

namespace {

PcmlpConfig tabular_config(int N, int M, double c) {
  PcmlpConfig cfg;
  cfg.N = N;
  cfg.K = 200;
  cfg.M = M;
  cfg.lambda = 1.0;
  cfg.bonus_scale = c;
  cfg.planner = PlannerKind::kTabular;
  cfg.family = ModelFamily::kLinMdp;
  cfg.sampling = SamplingMode::kTruncated;
  cfg.probe_count = 16;
  cfg.seed = 1;
  return cfg;
}

PcmlpConfig knr_config() {
  PcmlpConfig cfg;
  cfg.N = 2;
  cfg.K = 20;
  cfg.M = 40;
  cfg.lambda = 0.1;
  cfg.probe_count = 8;
  cfg.model_error_samples = 16;
  cfg.rollouts_per_policy = 2;
  cfg.mppi.K = 16;
  cfg.mppi.T = 5;
  cfg.seed = 2;
  return cfg;
}

}  // namespace

TEST(Schedule, BonusScaleExamples) {
  EXPECT_DOUBLE_EQ(schedule_c(ModelFamily::kLinMdp, 2, 4, 0.0, 0.0, 1.0, 1, 0.0), 4.0);
  EXPECT_DOUBLE_EQ(schedule_c(ModelFamily::kKnr, 1, 4, 1.0, 2.0, 1.0, 1, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(schedule_c(ModelFamily::kLinMdp, 3, 8, 0.0, 0.0, 1.0, 1, 1.0), 9.0);
  EXPECT_THROW(schedule_c(ModelFamily::kKnr, 1, 4, 1.0, 0.0, 1.0, 1, 0.0), PreconditionError);
}

TEST(Schedule, TheoreticalLinearMdpScale) {
  const TheoreticalSchedule s = theoretical_linmdp_schedule(0.5, 0.1, 3, 5, 4);
  EXPECT_DOUBLE_EQ(s.c, 3.0 * std::sqrt(6.0));
  EXPECT_GT(s.M, s.N);
  EXPECT_GT(s.K, s.N * s.N);
  EXPECT_THROW(theoretical_linmdp_schedule(1.5, 0.1, 3, 5, 4), PreconditionError);
}

TEST(Pcmlp, ExactModelAndNoBonusFindsOptimalPolicy) {
  TabularLinmdpParams p;
  p.seed = 6;
  const EnvInstance env = make_tabular_linmdp(p);
  const PcmlpResult r = run_pcmlp(tabular_config(1, 5000, 0.0), env);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_NEAR(r.records[0].value_true_mean, tabular_plan(*env.table).value, 1e-12);
}

TEST(Pcmlp, CoverAndRecordSizes) {
  const EnvInstance env = make_tabular_linmdp(TabularLinmdpParams{});
  const PcmlpResult r = run_pcmlp(tabular_config(4, 100, 1.0), env);
  EXPECT_EQ(r.cover.size(), 5u);
  EXPECT_EQ(r.records.size(), 4u);
  for (std::size_t i = 0; i < r.records.size(); ++i) EXPECT_EQ(r.records[i].iter, static_cast<int>(i) + 1);
}

TEST(Pcmlp, ZeroScaleGivesZeroBonus) {
  const EnvInstance env = make_chain(ChainParams{});
  const PcmlpResult r = run_pcmlp(tabular_config(3, 100, 0.0), env);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.bonus_max, 0.0);
    EXPECT_EQ(rec.avg_bonus_per_step, 0.0);
  }
}

TEST(Pcmlp, RewardFreeIgnoresEnvironmentReward) {
  const EnvInstance env = make_chain(ChainParams{});
  PcmlpConfig cfg = tabular_config(2, 100, 0.0);
  cfg.reward_free = true;
  for (const auto& rec : run_pcmlp(cfg, env).records) EXPECT_EQ(*rec.plan_value_model, 0.0);
}

TEST(Pcmlp, BonusDrivesChainExploration) {
  // The reward is out of reach, so without a bonus every plan ties and the
  // lowest action (left) keeps the agent at the start.
  const EnvInstance env = make_chain(ChainParams{10, 5, 0});
  auto start_mass = [&](const PcmlpResult& r) {
    return exact_average_occupancy(*r.cover.policies.back().table(), *env.table).row(0).sum();
  };
  EXPECT_DOUBLE_EQ(start_mass(run_pcmlp(tabular_config(5, 200, 0.0), env)), 1.0);
  EXPECT_LT(start_mass(run_pcmlp(tabular_config(5, 200, 1.0), env)), 0.5);
}

TEST(Pcmlp, SameSeedSameRecords) {
  const EnvInstance env = make_linear_system(LinearSystemParams{});
  const PcmlpResult a = run_pcmlp(knr_config(), env);
  const PcmlpResult b = run_pcmlp(knr_config(), env);
  ASSERT_EQ(a.records.size(), 2u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].value_true_mean, b.records[i].value_true_mean);
    EXPECT_EQ(a.records[i].bonus_mean, b.records[i].bonus_mean);
    EXPECT_EQ(a.records[i].model_error, b.records[i].model_error);
    EXPECT_TRUE(std::isfinite(a.records[i].bonus_mean));
  }
}

TEST(Pcmlp, InvalidConfigRejected) {
  const EnvInstance env = make_chain(ChainParams{});
  PcmlpConfig cfg = tabular_config(0, 100, 1.0);
  EXPECT_THROW(run_pcmlp(cfg, env), PreconditionError);
  cfg = tabular_config(1, 100, 1.0);
  cfg.lambda = 0.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = tabular_config(1, 100, 1.0);
  cfg.planner = PlannerKind::kMppi;
  EXPECT_THROW(cfg.validate(), PreconditionError);
}

TEST(Regret, OptimalPoliciesHaveZeroRegret) {
  std::vector<IterationRecord> records(4);
  for (auto& r : records) r.value_true_mean = 2.5;
  const RegretSummary s = regret_diagnostic(records, 2.5, 3);
  for (double v : s.cumulative_regret) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(s.within_bound);
}

TEST(Regret, NoBonusAndNoRewardGrowsLinearly) {
  std::vector<IterationRecord> records(10);
  const RegretSummary s = regret_diagnostic(records, 1.0, 4);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_DOUBLE_EQ(s.cumulative_regret[i], static_cast<double>(i + 1));
    EXPECT_EQ(s.cumulative_bonus[i], 0.0);
    EXPECT_EQ(s.bound[i], 4.0);
  }
  EXPECT_FALSE(s.within_bound);
}
