#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcmlp/config.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/experiments.hpp"
#include "pcmlp/metrics.hpp"

using namespace pcmlp;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny_odpc() {
  RunConfig cfg = parse_config("[run]\nexperiment = odpc\nenv = tabular-linmdp\nseed = 3\n[odpc]\nN = 3\nM = 50\n");
  return cfg;
}

}  // namespace

TEST(Config, ParsesSectionsAndDefaults) {
  const RunConfig cfg = parse_config("[run]\nenv = chain\nseed = 42\n[pcmlp]\nN = 7\nlambda = 0.5\n");
  EXPECT_EQ(cfg.env, "chain");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.pcmlp.N, 7);
  EXPECT_DOUBLE_EQ(cfg.pcmlp.lambda, 0.5);
  EXPECT_EQ(cfg.pcmlp.K, PcmlpConfig{}.K);
}

TEST(Config, UnknownKeysAreRejectedByName) {
  try {
    parse_config("[pcmlp]\nbogus = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("pcmlp.bogus"), std::string::npos);
  }
  EXPECT_THROW(parse_config("[nosuch]\nN = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[pcmlp]\nN = many\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, OverridesApply) {
  RunConfig cfg;
  apply_override(cfg, "pcmlp.bonus_scale=2.5");
  apply_override(cfg, "run.env=sparse-hill");
  EXPECT_DOUBLE_EQ(cfg.pcmlp.bonus_scale, 2.5);
  EXPECT_EQ(cfg.env, "sparse-hill");
  EXPECT_THROW(apply_override(cfg, "pcmlp.N"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "N=3"), ConfigError);
}

TEST(Config, ResolvedConfigRoundTrips) {
  RunConfig cfg = parse_config("[run]\nexperiment = ablation\nsweep = 0, 2.5\n[mppi]\nK = 17\n[pcmlp]\nlambda = 0.125\n");
  const std::string text = resolved_config(cfg);
  const RunConfig back = parse_config(text);
  EXPECT_EQ(resolved_config(back), text);
  EXPECT_EQ(back.sweep, (std::vector<double>{0.0, 2.5}));
  EXPECT_EQ(back.pcmlp.mppi.K, 17);
}

TEST(Config, EveryKeyIsDocumentedAndReadable) {
  const RunConfig cfg;
  for (const auto& k : config_keys()) {
    EXPECT_FALSE(k.doc.empty()) << k.section << "." << k.key;
    EXPECT_NO_THROW(get_value(cfg, k.section, k.key)) << k.section << "." << k.key;
  }
}

TEST(Config, EveryEnvironmentBuilds) {
  for (const char* name : {"linear-system", "sparse-hill", "tabular-linmdp", "chain"}) {
    RunConfig cfg;
    cfg.env = name;
    EXPECT_EQ(make_env(cfg).name, name);
  }
  RunConfig bad;
  bad.env = "nowhere";
  EXPECT_THROW(make_env(bad), ConfigError);
}

TEST(Metrics, EmptyRunIsHeaderOnly) {
  EXPECT_EQ(emit_metrics({}), std::string(kMetricsHeader) + "\n");
  EXPECT_TRUE(parse_metrics(emit_metrics({})).empty());
}

TEST(Metrics, RoundTripKeepsMissingFieldsEmpty) {
  MetricsRow a;
  a.iter = 1;
  a.bonus_min = 0.125;
  a.bonus_mean = 1.0 / 3.0;
  a.bonus_max = 2.0;
  a.value_true_mean = 12.5;
  a.value_true_se = 0.0;
  a.info_gain = 3.25;
  MetricsRow b = a;
  b.iter = 2;
  b.model_error = 0.5;
  b.feasible = true;
  b.coverage = 0.75;
  const std::string csv = emit_metrics({a, b});
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(first.rfind("1,,", 0), 0u);
  EXPECT_EQ(first.back(), ',');
  const auto rows = parse_metrics(csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].feasible, std::optional<bool>(true));
  EXPECT_FALSE(rows[0].model_error.has_value());
  EXPECT_NEAR(*rows[0].bonus_mean, 1.0 / 3.0, 1e-10);
  EXPECT_THROW(parse_metrics("wrong,header\n"), ConfigError);
}

TEST(Experiments, SameSeedGivesIdenticalFiles) {
  const auto base = std::filesystem::temp_directory_path() / "pcmlp_harness_test";
  std::filesystem::remove_all(base);
  const RunConfig cfg = tiny_odpc();
  write_outputs(cfg, run_experiment(cfg), (base / "a").string());
  write_outputs(cfg, run_experiment(cfg), (base / "b").string());
  for (const char* f : {"metrics.csv", "summary.txt", "resolved_config.ini"}) {
    const std::string a = slurp(base / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(base / "b" / f)) << f;
  }
  const auto rows = parse_metrics(slurp(base / "a" / "metrics.csv"));
  EXPECT_EQ(rows.size(), 3u);
  for (const auto& r : rows) EXPECT_TRUE(r.feasible.has_value());
  std::filesystem::remove_all(base);
}

TEST(Experiments, BonusDecayRatio) {
  std::vector<IterationRecord> records(4);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].avg_bonus_per_step = 8.0 / static_cast<double>(1 << (2 * i));
  EXPECT_DOUBLE_EQ(bonus_decay_ratio(records), 1.0 / 64.0);
}
