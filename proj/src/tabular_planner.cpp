#include <algorithm>
#include <cmath>
#include <string>

#include "pcmlp/errors.hpp"
#include "pcmlp/planners.hpp"

namespace pcmlp {

TabularPlan tabular_plan(const TabularMdp& mdp) {
  mdp.validate();
  const int nS = mdp.n_states;
  const int nA = mdp.n_actions;
  const int H = mdp.horizon;
  std::vector<Vector> V(static_cast<std::size_t>(H + 1), Vector::Zero(nS));
  std::vector<std::vector<int>> actions(static_cast<std::size_t>(H), std::vector<int>(static_cast<std::size_t>(nS), 0));
  for (int h = H - 1; h >= 0; --h) {
    const Vector& next = V[static_cast<std::size_t>(h + 1)];
    for (int s = 0; s < nS; ++s) {
      int best = 0;
      double best_q = mdp.r(s, 0) + mdp.p(s, 0).dot(next);
      for (int a = 1; a < nA; ++a) {
        const double q = mdp.r(s, a) + mdp.p(s, a).dot(next);
        if (q > best_q) {
          best_q = q;
          best = a;
        }
      }
      V[static_cast<std::size_t>(h)](s) = best_q;
      actions[static_cast<std::size_t>(h)][static_cast<std::size_t>(s)] = best;
    }
  }
  TabularPlan plan{TabularPolicy::deterministic(nA, actions), V, V[0](mdp.initial_state)};
  return plan;
}

TabularPlan tabular_plan(const MdpSpec& mdp) { return tabular_plan(to_tabular(mdp)); }

std::vector<TabularPolicy> enumerate_deterministic_policies(int n_states, int n_actions, int horizon,
                                                            std::size_t limit) {
  const int slots = n_states * horizon;
  double count = std::pow(static_cast<double>(n_actions), slots);
  if (count > static_cast<double>(limit)) {
    throw PreconditionError("enumerate_deterministic_policies: " + std::to_string(count) + " policies exceeds limit");
  }
  std::vector<TabularPolicy> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> digits(static_cast<std::size_t>(slots), 0);
  while (true) {
    std::vector<std::vector<int>> table(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
      table[static_cast<std::size_t>(h)].assign(digits.begin() + h * n_states, digits.begin() + (h + 1) * n_states);
    }
    out.push_back(TabularPolicy::deterministic(n_actions, table));
    int i = 0;
    while (i < slots && ++digits[static_cast<std::size_t>(i)] == n_actions) digits[static_cast<std::size_t>(i++)] = 0;
    if (i == slots) break;
  }
  return out;
}

SearchResult exhaustive_policy_search(const TabularMdp& mdp, std::span<const TabularPolicy> policies) {
  if (policies.empty()) throw PreconditionError("exhaustive_policy_search: empty policy list");
  SearchResult best{0, exact_value_tabular(policies[0], mdp)};
  for (std::size_t i = 1; i < policies.size(); ++i) {
    const double v = exact_value_tabular(policies[i], mdp);
    if (v > best.value) best = {i, v};
  }
  return best;
}

OptimisticPlan optimistic_plan(std::span<const TabularMdp> models, std::span<const std::size_t> members,
                               std::span<const TabularPolicy> policies) {
  if (members.empty()) throw ConfidenceRegionEmpty("optimistic_plan: empty confidence set");
  std::vector<std::size_t> order(members.begin(), members.end());
  std::sort(order.begin(), order.end());
  std::optional<OptimisticPlan> best;
  for (const std::size_t m : order) {
    if (m >= models.size()) throw DimensionError("optimistic_plan: member index out of range");
    const TabularMdp& mdp = models[m];
    if (policies.empty()) {
      TabularPlan plan = tabular_plan(mdp);
      if (!best || plan.value > best->value) best = OptimisticPlan{std::move(plan.policy), m, plan.value};
    } else {
      const SearchResult r = exhaustive_policy_search(mdp, policies);
      if (!best || r.value > best->value) best = OptimisticPlan{policies[r.index], m, r.value};
    }
  }
  return *best;
}

}  // namespace pcmlp
