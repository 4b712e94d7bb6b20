#pragma once

// Shared fixtures and brute-force oracles for the unit tests. The oracles are
// written independently of the library code they check.

#include <vector>

#include "pcmlp/mdp.hpp"
#include "pcmlp/rng.hpp"

namespace pcmlp::testing {

inline Vector random_distribution(int n, Rng& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = -std::log(1.0 - rng.uniform());
  return v / v.sum();
}

inline TabularMdp random_mdp(int nS, int nA, int H, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "test/mdp");
  TabularMdp m;
  m.n_states = nS;
  m.n_actions = nA;
  m.horizon = H;
  for (int i = 0; i < nS * nA; ++i) {
    m.reward.push_back(rng.uniform());
    m.transition.push_back(random_distribution(nS, rng));
  }
  return m;
}

inline TabularPolicy random_policy(int H, int nS, int nA, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "test/policy");
  std::vector<Matrix> probs;
  for (int h = 0; h < H; ++h) {
    Matrix p(nS, nA);
    for (int s = 0; s < nS; ++s) p.row(s) = random_distribution(nA, rng).transpose();
    probs.push_back(p);
  }
  return TabularPolicy(H, nS, nA, probs);
}

// State distributions at each step by forward recursion.
inline std::vector<Matrix> oracle_occupancy(const TabularPolicy& pi, const TabularMdp& m) {
  std::vector<Matrix> out;
  std::vector<double> mu(static_cast<std::size_t>(m.n_states), 0.0);
  mu[static_cast<std::size_t>(m.initial_state)] = 1.0;
  for (int h = 0; h < m.horizon; ++h) {
    Matrix d(m.n_states, m.n_actions);
    std::vector<double> next(static_cast<std::size_t>(m.n_states), 0.0);
    for (int s = 0; s < m.n_states; ++s) {
      for (int a = 0; a < m.n_actions; ++a) {
        d(s, a) = mu[static_cast<std::size_t>(s)] * pi.prob(h, s, a);
        for (int t = 0; t < m.n_states; ++t) next[static_cast<std::size_t>(t)] += d(s, a) * m.p(s, a)(t);
      }
    }
    out.push_back(d);
    mu = next;
  }
  return out;
}

inline Matrix oracle_average_occupancy(const TabularPolicy& pi, const TabularMdp& m) {
  Matrix avg = Matrix::Zero(m.n_states, m.n_actions);
  for (const auto& d : oracle_occupancy(pi, m)) avg += d;
  return avg / m.horizon;
}

// J = sum_h sum_{s,a} d_h(s, a) r(s, a).
inline double oracle_value(const TabularPolicy& pi, const TabularMdp& m) {
  double j = 0.0;
  for (const auto& d : oracle_occupancy(pi, m)) {
    for (int s = 0; s < m.n_states; ++s) {
      for (int a = 0; a < m.n_actions; ++a) j += d(s, a) * m.r(s, a);
    }
  }
  return j;
}

// Best value over all deterministic nonstationary policies, by enumeration.
inline double oracle_best_value(const TabularMdp& m) {
  const int slots = m.n_states * m.horizon;
  std::vector<int> choice(static_cast<std::size_t>(slots), 0);
  double best = -1e300;
  while (true) {
    std::vector<std::vector<int>> table(static_cast<std::size_t>(m.horizon), std::vector<int>(m.n_states));
    for (int i = 0; i < slots; ++i) table[i / m.n_states][i % m.n_states] = choice[static_cast<std::size_t>(i)];
    best = std::max(best, oracle_value(TabularPolicy::deterministic(m.n_actions, table), m));
    int k = 0;
    while (k < slots && ++choice[static_cast<std::size_t>(k)] == m.n_actions) choice[static_cast<std::size_t>(k++)] = 0;
    if (k == slots) break;
  }
  return best;
}

}  // namespace pcmlp::testing
