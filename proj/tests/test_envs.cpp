#include <gtest/gtest.h>

#include <cmath>

#include "pcmlp/envs.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/mle.hpp"

using namespace pcmlp;

namespace {

Policy constant_action(int dim, double value) {
  return Policy::stateless("constant", [dim, value](const State&, int, Rng&) { return Action::Constant(dim, value); });
}

}  // namespace

TEST(LinearSystem, ZeroDynamicsStayFrozen) {
  LinearSystemParams p;
  p.a_norm = 0.0;
  p.b_norm = 0.0;
  p.sigma = 0.0;
  const EnvInstance env = make_linear_system(p);
  Rng rng(0);
  const Trajectory t = rollout(env.uniform_policy(), env.mdp, rng);
  for (const auto& x : t.steps) EXPECT_EQ(x.next_state, Vector::Zero(2));
}

TEST(LinearSystem, ZeroActionsDecayGeometrically) {
  LinearSystemParams p;
  p.sigma = 0.0;
  p.start = 0.8;
  p.seed = 3;
  const EnvInstance env = make_linear_system(p);
  const Action zero = Action::Zero(1);
  Matrix A(2, 2);
  for (int i = 0; i < 2; ++i) A.col(i) = env.mean_step(Vector::Unit(2, i) * 0.1, zero) / 0.1;
  EXPECT_NEAR(Eigen::JacobiSVD<Matrix>(A).singularValues()(0), 0.95, 1e-12);

  Rng rng(1);
  const Trajectory t = rollout(constant_action(1, 0.0), env.mdp, rng);
  Vector s = env.mdp.initial_state;
  for (const auto& x : t.steps) {
    s = A * s;
    EXPECT_LE((x.next_state - s).norm(), 1e-12);
  }
}

TEST(LinearSystem, TruthIsRealizable) {
  const EnvInstance env = make_linear_system(LinearSystemParams{});
  ASSERT_TRUE(env.knr_truth.has_value());
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const State s = Vector::Random(2);
    const Action a = Vector::Constant(1, rng.uniform(-1.0, 1.0));
    EXPECT_LE((env.knr_truth->mean(env.features(s, a)) - env.mean_step(s, a)).norm(), 1e-12);
  }
}

TEST(SparseHill, IdlePolicyCollectsOnlyControlReward) {
  const EnvInstance env = make_sparse_hill(0);
  Rng rng(0);
  const Trajectory t = rollout(constant_action(1, 0.0), env.mdp, rng);
  EXPECT_NEAR(t.total_reward(), 0.1 * 60, 1e-12);
  for (const auto& x : t.steps) EXPECT_FALSE(env.goal(x.next_state));
}

TEST(SparseHill, BangBangReachesTheGoal) {
  SparseHillParams p;
  p.horizon = 100;
  const EnvInstance env = make_sparse_hill(p);
  const Policy push = Policy::stateless(
      "bang-bang", [](const State& s, int, Rng&) { return Action::Constant(1, s(1) >= 0.0 ? 1.0 : -1.0); });
  Rng rng(0);
  const Trajectory t = rollout(push, env.mdp, rng);
  int first = -1;
  for (std::size_t i = 0; i < t.steps.size() && first < 0; ++i) {
    if (env.goal(t.steps[i].next_state)) first = static_cast<int>(i) + 1;
  }
  EXPECT_GT(first, 0);
  EXPECT_LE(first, 100);
}

TEST(TabularLinmdp, SingleCandidateIsTheTruth) {
  TabularLinmdpParams p;
  p.n_candidates = 1;
  const EnvInstance env = make_tabular_linmdp(p);
  EXPECT_EQ(env.candidates->size(), 1u);
  EXPECT_EQ(env.truth_index, 0u);
}

TEST(TabularLinmdp, ZeroGapMakesCandidatesIdentical) {
  TabularLinmdpParams p;
  p.tv_gap = 0.0;
  const EnvInstance env = make_tabular_linmdp(p);
  const auto& model = std::get<LinearMdpModel>(std::get<TransitionModel>(env.mdp.dynamics));
  for (std::size_t c = 0; c < model.candidate_count(); ++c) {
    for (int s = 0; s < p.n_states; ++s) {
      for (int a = 0; a < p.n_actions; ++a) {
        EXPECT_LE((model.next_dist(s, a, c) - model.next_dist(s, a, env.truth_index)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(TabularLinmdp, DecoysSitAtTheRequestedGap) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TabularLinmdpParams p;
    p.seed = seed;
    p.tv_gap = 0.2;
    const EnvInstance env = make_tabular_linmdp(p);
    const auto& model = std::get<LinearMdpModel>(std::get<TransitionModel>(env.mdp.dynamics));
    for (std::size_t c = 0; c < model.candidate_count(); ++c) {
      if (c == env.truth_index) continue;
      for (int s = 0; s < p.n_states; ++s) {
        for (int a = 0; a < p.n_actions; ++a) {
          const Vector d = model.next_dist(s, a, c) - model.next_dist(s, a, env.truth_index);
          EXPECT_NEAR(0.5 * d.cwiseAbs().sum(), 0.2, 1e-9);
          EXPECT_NEAR(model.next_dist(s, a, c).sum(), 1.0, 1e-12);
        }
      }
    }
  }
}

TEST(Coverage, EmptyAndFrozen) {
  const EnvInstance env = make_chain(ChainParams{});
  EXPECT_EQ(coverage_metric(std::vector<Trajectory>{}, env.grid), 0.0);
  Trajectory t;
  t.steps.push_back({encode_index(3), encode_index(0), 0.0, encode_index(3)});
  EXPECT_DOUBLE_EQ(coverage_metric(std::vector<Trajectory>{t}, env.grid), 1.0 / env.grid.cell_count());
}

TEST(Coverage, RandomWalkMatchesReachability) {
  // Probability that a plain random walk on the clamped chain visits cell
  // j within H steps, by dynamic programming with j absorbing.
  const int n = 10, H = 8, episodes = 20, runs = 300;
  const EnvInstance env = make_chain(ChainParams{n, H, 0});
  double expected = 0.0;
  for (int j = 0; j < n; ++j) {
    std::vector<double> mass(n, 0.0);
    mass[0] = 1.0;
    double hit = j == 0 ? 1.0 : 0.0;
    if (j != 0) {
      for (int t = 0; t < H; ++t) {
        std::vector<double> next(n, 0.0);
        for (int s = 0; s < n; ++s) {
          next[std::max(s - 1, 0)] += 0.5 * mass[s];
          next[std::min(s + 1, n - 1)] += 0.5 * mass[s];
        }
        hit += next[j];
        next[j] = 0.0;
        mass = next;
      }
    }
    expected += (1.0 - std::pow(1.0 - hit, episodes)) / n;
  }
  Rng rng(7);
  double observed = 0.0;
  for (int r = 0; r < runs; ++r) observed += coverage_metric(rollouts(env.uniform_policy(), env.mdp, episodes, rng), env.grid);
  EXPECT_NEAR(observed / runs, expected, 0.01);
}

TEST(Envs, RewardsLieInUnitInterval) {
  std::vector<EnvInstance> envs = {make_linear_system(LinearSystemParams{}), make_sparse_hill(1),
                                   make_tabular_linmdp(TabularLinmdpParams{}), make_chain(ChainParams{})};
  for (auto& env : envs) {
    MdpSpec raw = env.mdp;
    raw.clamp_rewards = false;
    Rng rng(11);
    for (const auto& t : rollouts(env.uniform_policy(), raw, 2000, rng)) {
      for (const auto& x : t.steps) {
        EXPECT_GE(x.reward, 0.0) << env.name;
        EXPECT_LE(x.reward, 1.0) << env.name;
      }
    }
  }
}

TEST(Envs, CatalogListsEveryEnvironment) {
  const auto entries = list_envs();
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0].name, "linear-system");
  EXPECT_THROW(make_chain(ChainParams{1, 5, 0}), PreconditionError);
}
