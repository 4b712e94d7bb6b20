#include <gtest/gtest.h>

#include <cmath>

#include "pcmlp/cover.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/features.hpp"
#include "test_util.hpp"

using namespace pcmlp;
using namespace pcmlp::testing;

namespace {

// One state, two actions, each step returns to the state.
TabularMdp bandit(int H) {
  TabularMdp m;
  m.n_states = 1;
  m.n_actions = 2;
  m.horizon = H;
  m.reward = {0.0, 0.0};
  m.transition = {Vector::Ones(1), Vector::Ones(1)};
  return m;
}

Matrix random_cov(int d, Rng& rng) {
  // Average of outer products of vectors in the unit ball.
  Matrix c = Matrix::Zero(d, d);
  for (int i = 0; i < 5; ++i) {
    Vector v(d);
    for (int j = 0; j < d; ++j) v(j) = rng.normal();
    v *= rng.uniform() / v.norm();
    c += v * v.transpose() / 5.0;
  }
  return c;
}

}  // namespace

TEST(Cover, SinglePairCovarianceIsOuterProduct) {
  const TabularPolicy pi = TabularPolicy::deterministic(2, {{1}, {1}, {1}});
  Rng rng(0);
  const Matrix cov = estimate_policy_cov(Policy::tabular(pi), bandit(3).to_spec(), FeatureMap::one_hot(1, 2), 50, rng);
  Matrix expect = Matrix::Zero(2, 2);
  expect(1, 1) = 1.0;
  EXPECT_EQ(cov, expect);
}

TEST(Cover, ZeroFeaturesGiveZeroCovariance) {
  const FeatureMap zero = FeatureMap::custom(3, [](const State&, const Action&) { return Vector::Zero(3); });
  Rng rng(0);
  const Matrix cov =
      estimate_policy_cov(Policy::tabular(TabularPolicy::uniform(2, 1, 2)), bandit(2).to_spec(), zero, 20, rng);
  EXPECT_EQ(cov, Matrix::Zero(3, 3));
}

TEST(Cover, EstimateConvergesToExactOneHotCovariance) {
  const TabularMdp m = random_mdp(3, 2, 3, 31);
  const TabularPolicy pi = random_policy(3, 3, 2, 32);
  const Matrix occ = oracle_average_occupancy(pi, m);
  Matrix exact = Matrix::Zero(6, 6);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) exact(s * 2 + a, s * 2 + a) = occ(s, a);
  }
  Rng rng(33);
  const Matrix est = estimate_policy_cov(Policy::tabular(pi), m.to_spec(), FeatureMap::one_hot(3, 2), 100000, rng);
  EXPECT_LE((est - exact).norm(), 0.02);
}

TEST(Cover, AggregateExamples) {
  EXPECT_EQ(aggregate(std::vector<Matrix>{}, 0.5, 3), 0.5 * Matrix::Identity(3, 3));
  Matrix e1 = Matrix::Zero(3, 3);
  e1(0, 0) = 1.0;
  const Matrix agg = aggregate(std::vector<Matrix>{e1, e1}, 1.0, 3);
  EXPECT_EQ(agg, Vector(Eigen::Vector3d(3, 1, 1)).asDiagonal().toDenseMatrix());
  EXPECT_THROW(aggregate(std::vector<Matrix>{}, 0.0, 3), PreconditionError);
}

TEST(Bonus, Examples) {
  const Vector e1 = Vector::Unit(2, 0);
  EXPECT_DOUBLE_EQ(BonusSpec(Matrix::Identity(2, 2), 1.0, 10.0, 1.0)(e1), 2.0);
  EXPECT_DOUBLE_EQ(BonusSpec(Matrix::Identity(2, 2), 100.0, 10.0, 1.0)(e1), 10.0);
  const Matrix d = Vector(Eigen::Vector2d(2, 1)).asDiagonal();
  EXPECT_NEAR(BonusSpec(d, 1.0, 10.0, 1.0)(e1), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(BonusSpec(Matrix::Identity(2, 2), 1.0, 10.0, 1.0, BonusForm::kLemma)(e1), std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(BonusSpec(Matrix::Identity(2, 2), 0.0, 10.0, 1.0)(e1), 0.0);
}

TEST(Bonus, NonPositiveDefiniteCovarianceThrows) {
  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = -1.0;
  EXPECT_THROW(BonusSpec(bad, 1.0, 1.0, 1.0), NumericError);
}

TEST(Bonus, ShrinksAsCoverGrows) {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + rng.uniform_int(6);
    std::vector<Matrix> covs;
    std::vector<Vector> probes;
    for (int i = 0; i < 10; ++i) {
      Vector v(d);
      for (int j = 0; j < d; ++j) v(j) = rng.normal();
      probes.push_back(v / v.norm());
    }
    std::vector<double> prev(probes.size(), 1e300);
    for (int n = 0; n < 8; ++n) {
      covs.push_back(random_cov(d, rng));
      const BonusSpec b(aggregate(covs, 0.1, d), 1.0, 5.0, 0.1);
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const double v = b(probes[i]);
        EXPECT_LE(v, prev[i] + 1e-12);
        prev[i] = v;
      }
    }
  }
}

TEST(Sandwich, ExactEqualsEmpiricalGivesRatioTwo) {
  Rng rng(1);
  std::vector<Matrix> covs = {random_cov(3, rng), random_cov(3, rng)};
  std::vector<Vector> probes = {Vector::Unit(3, 0), Vector::Constant(3, 0.5)};
  const SandwichStats s = bonus_sandwich_check(covs, covs, probes, 0.1, 100.0, 1.0);
  EXPECT_NEAR(s.min_ratio, 2.0, 1e-12);
  EXPECT_NEAR(s.max_ratio, 2.0, 1e-12);
  EXPECT_NEAR(s.min_quad_ratio, 1.0, 1e-12);
  EXPECT_TRUE(s.ratio_within);
  EXPECT_TRUE(s.quad_within);
}

TEST(Sandwich, BothClampedGivesRatioOne) {
  Rng rng(2);
  std::vector<Matrix> covs = {random_cov(2, rng)};
  std::vector<Vector> probes = {Vector::Unit(2, 1)};
  const SandwichStats s = bonus_sandwich_check(covs, covs, probes, 1e6, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(s.min_ratio, 1.0);
  EXPECT_DOUBLE_EQ(s.max_ratio, 1.0);
}

TEST(InformationGain, Examples) {
  EXPECT_EQ(information_gain(std::vector<Matrix>{}, 1.0), 0.0);
  EXPECT_NEAR(information_gain(std::vector<Matrix>{Matrix::Identity(3, 3)}, 1.0), 3.0 * std::log(2.0), 1e-14);
}

TEST(InformationGain, BoundedByDimensionLog) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + rng.uniform_int(5);
    const int n = 1 + rng.uniform_int(20);
    const double lambda = rng.uniform(0.1, 2.0);
    std::vector<Matrix> covs;
    for (int i = 0; i < n; ++i) covs.push_back(random_cov(d, rng));
    // Each covariance has trace <= 1.
    EXPECT_LE(information_gain(covs, lambda), d * std::log(1.0 + n / (d * lambda)) + 1e-9);
  }
}

TEST(Telescope, Examples) {
  const TelescopeSides zero = trace_telescope_check(std::vector<Matrix>{Matrix::Zero(2, 2)}, 1.0);
  EXPECT_NEAR(zero.lhs, 0.0, 1e-15);
  EXPECT_NEAR(zero.rhs, 0.0, 1e-15);
  const TelescopeSides one = trace_telescope_check(std::vector<Matrix>{Matrix::Ones(1, 1)}, 1.0);
  EXPECT_NEAR(one.lhs, 2.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(one.rhs, 1.0, 1e-14);
  EXPECT_THROW(trace_telescope_check(std::vector<Matrix>{2.0 * Matrix::Identity(2, 2)}, 1.0), PreconditionError);
}

TEST(Telescope, RhsBoundedByLhsForUnitLambda) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + rng.uniform_int(6);
    std::vector<Matrix> covs;
    for (int i = 0, n = 1 + rng.uniform_int(15); i < n; ++i) covs.push_back(random_cov(d, rng));
    const TelescopeSides t = trace_telescope_check(covs, rng.uniform(1.0, 2.0));
    EXPECT_LE(t.rhs, t.lhs + 1e-10);
  }
}

TEST(Mixture, SamplesPoliciesUniformly) {
  PolicyCover cover;
  const TabularMdp m = bandit(2);
  cover.add(Policy::tabular(TabularPolicy::deterministic(2, {{0}, {0}})), Matrix::Zero(2, 2));
  cover.add(Policy::tabular(TabularPolicy::deterministic(2, {{1}, {1}})), Matrix::Zero(2, 2));
  const MdpSpec spec = m.to_spec();
  Rng rng(5);
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += mixture_sample(cover, spec, rng).action(0) == 0.0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.5, 0.01);
  EXPECT_THROW(mixture_sample(PolicyCover{}, spec, rng), PreconditionError);
}
