#include <gtest/gtest.h>

#include <cmath>

#include "pcmlp/envs.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/lemmas.hpp"
#include "pcmlp/odpc.hpp"
#include "test_util.hpp"

using namespace pcmlp;
using namespace pcmlp::testing;

namespace {

EluderInstance random_instance(std::uint64_t seed, int n_models, int n_policies, double epsilon) {
  EluderInstance inst;
  inst.context = random_mdp(2, 2, 2, seed);
  for (int m = 0; m < n_models; ++m) inst.models.push_back(random_mdp(2, 2, 2, seed * 100 + m + 1).transition);
  Rng rng = Rng::stream(seed, "test/eluder");
  for (int p = 0; p < n_policies; ++p) {
    std::vector<std::vector<int>> table(2, std::vector<int>(2));
    for (auto& row : table) {
      for (auto& a : row) a = rng.uniform_int(2);
    }
    inst.policies.push_back(TabularPolicy::deterministic(2, table));
  }
  inst.epsilon = epsilon;
  return inst;
}

// Expected L1 distance between two models under a policy's occupancy.
double expected_l1(const EluderInstance& inst, const TabularPolicy& pi, std::size_t i, std::size_t j) {
  const Matrix occ = oracle_average_occupancy(pi, inst.context);
  double e = 0.0;
  for (int s = 0; s < inst.context.n_states; ++s) {
    for (int a = 0; a < inst.context.n_actions; ++a) {
      const auto k = static_cast<std::size_t>(s * inst.context.n_actions + a);
      e += occ(s, a) * (inst.models[i][k] - inst.models[j][k]).cwiseAbs().sum();
    }
  }
  return e;
}

double oracle_w_k(const EluderInstance& inst, const std::vector<std::size_t>& prefix, std::size_t next) {
  double best = 0.0;
  for (std::size_t i = 0; i < inst.models.size(); ++i) {
    for (std::size_t j = i + 1; j < inst.models.size(); ++j) {
      double sq = 0.0;
      for (const std::size_t p : prefix) sq += std::pow(0.5 * expected_l1(inst, inst.policies[p], i, j), 2);
      if (std::sqrt(sq) <= inst.epsilon) best = std::max(best, expected_l1(inst, inst.policies[next], i, j));
    }
  }
  return best;
}

}  // namespace

TEST(Odpc, FeasibilityRadiusFormula) {
  const double l = std::log(2.0 * 4 * 5 / 0.1);
  EXPECT_NEAR(feasibility_radius(4, 5, 0.1, 500), 6.0 * std::sqrt(l / 500) + 2.0 * l / 500, 1e-15);
  EXPECT_THROW(feasibility_radius(0, 5, 0.1, 500), PreconditionError);
}

TEST(Odpc, SingletonClassPlaysOptimalPolicy) {
  TabularLinmdpParams p;
  p.n_candidates = 1;
  p.seed = 3;
  const EnvInstance env = make_tabular_linmdp(p);
  OdpcConfig cfg;
  cfg.N = 4;
  cfg.M = 50;
  const OdpcResult r = run_odpc(cfg, env);
  ASSERT_EQ(r.records.size(), 4u);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.region.members.size(), 1u);
    EXPECT_NEAR(rec.value_true, r.v_star, 1e-12);
  }
}

TEST(Odpc, DuplicateOfTruthAlwaysFeasible) {
  TabularLinmdpParams p;
  p.tv_gap = 0.0;
  p.seed = 4;
  const EnvInstance env = make_tabular_linmdp(p);
  OdpcConfig cfg;
  cfg.N = 3;
  cfg.M = 100;
  const OdpcResult r = run_odpc(cfg, env);
  EXPECT_TRUE(r.truth_always_feasible);
  for (const auto& rec : r.records) EXPECT_EQ(rec.region.members.size(), env.candidates->size());
}

TEST(Odpc, ConfidenceRegionStatistics) {
  TabularLinmdpParams p;
  p.seed = 5;
  const EnvInstance env = make_tabular_linmdp(p);
  const auto& model = std::get<LinearMdpModel>(std::get<TransitionModel>(env.mdp.dynamics));
  const std::vector<std::pair<int, int>> held = {{0, 0}, {1, 1}, {3, 0}};
  const ConfidenceRegion region = confidence_region(model, 0, held, 0.1);
  for (std::size_t k = 0; k < model.candidate_count(); ++k) {
    double expect = 0.0;
    for (const auto& [s, a] : held) {
      const double l1 = (model.next_dist(s, a, 0) - model.next_dist(s, a, k)).cwiseAbs().sum();
      expect += l1 * l1 / 3.0;
    }
    EXPECT_NEAR(region.statistics[k], expect, 1e-12);
  }
  EXPECT_EQ(region.statistics[0], 0.0);
  // Decoy rows are 0.25 away in TV (0.5 in L1), so each decoy scores 0.25.
  const ConfidenceRegion tight = confidence_region(model, 0, held, 0.0);
  EXPECT_EQ(tight.members, std::vector<std::size_t>{0});
}

TEST(Eluder, SingletonClassHasZeroWidth) {
  const EluderInstance inst = eluder_singleton_instance(0.1);
  for (std::size_t p = 0; p < inst.policies.size(); ++p) EXPECT_EQ(eluder_w_k(inst, {}, p), 0.0);
  EXPECT_EQ(eluder_dimension(inst, 8).dimension, 0);
}

TEST(Eluder, SeparatedPairHasDimensionOne) {
  const EluderInstance inst = eluder_separated_instance(0.1, 0.3);
  const EluderResult r = eluder_dimension(inst, 8);
  EXPECT_EQ(r.dimension, 1);
  EXPECT_FALSE(r.budget_exceeded);
}

TEST(Eluder, FirstWidthIsTwiceTheRowGap) {
  // Every row of model 1 is 0.2 away from model 0 in TV.
  EluderInstance inst = random_instance(9, 1, 3, 0.1);
  std::vector<Vector> shifted;
  for (const auto& r : inst.models[0]) {
    Vector v = Vector::Zero(2);
    v(0) = 1.0;
    shifted.push_back(v);
  }
  std::vector<Vector> other = shifted;
  for (auto& v : other) {
    v(0) = 0.8;
    v(1) = 0.2;
  }
  inst.models = {shifted, other};
  for (std::size_t p = 0; p < 3; ++p) EXPECT_NEAR(eluder_w_k(inst, {}, p), 0.4, 1e-12);
}

TEST(Eluder, WidthMatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EluderInstance inst = random_instance(seed, 3, 2, 0.15);
    const std::vector<std::vector<std::size_t>> prefixes = {{}, {0}, {1}, {0, 1}, {1, 1}};
    for (const auto& prefix : prefixes) {
      for (std::size_t next = 0; next < 2; ++next) {
        EXPECT_NEAR(eluder_w_k(inst, prefix, next), oracle_w_k(inst, prefix, next), 1e-12);
      }
    }
  }
}

TEST(Eluder, WidthNonIncreasingAlongPrefix) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const EluderInstance inst = random_instance(seed, 4, 4, 0.2);
    const EluderTable table = eluder_table(inst);
    std::vector<std::size_t> prefix;
    double prev = 1e300;
    for (int k = 0; k < 6; ++k) {
      const double w = eluder_w_k(inst, table, prefix, 0);
      EXPECT_LE(w, prev + 1e-15);
      prev = w;
      prefix.push_back(static_cast<std::size_t>(k % 4));
    }
  }
}

TEST(Eluder, WitnessIsAValidSequence) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const double eps : {0.02, 0.05, 0.1, 0.2, 0.5}) {
      const EluderInstance inst = random_instance(seed, 3, 3, eps);
      const EluderResult r = eluder_dimension(inst, 6, true, 1000000);
      ASSERT_EQ(r.witness.size(), static_cast<std::size_t>(r.dimension));
      std::vector<std::size_t> prefix;
      for (const std::size_t p : r.witness) {
        EXPECT_GE(oracle_w_k(inst, prefix, p), eps);
        prefix.push_back(p);
      }
    }
  }
}

TEST(Eluder, LargeEpsilonGivesZero) {
  // w_k is at most 2.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_EQ(eluder_dimension(random_instance(seed, 3, 3, 2.01), 6).dimension, 0);
  }
}

TEST(Eluder, ParsesJsonInstances) {
  const std::string text = R"({
    "epsilon": 0.1, "n_states": 2, "n_actions": 2, "horizon": 1,
    "models": [[[1, 0], [1, 0], [0, 1], [0, 1]], [[0.7, 0.3], [1, 0], [0, 1], [0, 1]]],
    "policies": [[[0, 0]], [[1, 1]]]
  })";
  const EluderInstance inst = parse_eluder_instance(text);
  EXPECT_EQ(inst.models.size(), 2u);
  EXPECT_EQ(inst.policies.size(), 2u);
  EXPECT_EQ(eluder_dimension(inst, 8).dimension, 1);
  EXPECT_THROW(parse_eluder_instance("{\"epsilon\": 0.1}"), ConfigError);
  EXPECT_THROW(parse_eluder_instance("not json"), ConfigError);
  EXPECT_THROW(load_eluder_instance("/nonexistent/instance.json"), ConfigError);
}
