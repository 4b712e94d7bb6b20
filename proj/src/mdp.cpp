#include "pcmlp/mdp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "pcmlp/errors.hpp"
#include "pcmlp/log.hpp"
#include "pcmlp/parallel.hpp"

namespace pcmlp {

namespace {

std::atomic<bool> g_clamp_warned{false};

double checked_reward(const MdpSpec& mdp, const State& s, const Action& a) {
  const double r = mdp.reward(s, a);
  if (!mdp.clamp_rewards || (r >= 0.0 && r <= 1.0)) return r;
  if (!g_clamp_warned.exchange(true)) {
    log_warning("reward " + std::to_string(r) + " outside [0, 1] clamped (further clamps not reported)");
  }
  return std::clamp(r, 0.0, 1.0);
}

void check_finite(const State& s, int step) {
  if (!s.allFinite()) throw RolloutError("dynamics produced a non-finite state at step " + std::to_string(step), step);
}

}  // namespace

State step_dynamics(const MdpSpec& mdp, const State& s, const Action& a, Rng& rng) {
  return std::visit(
      [&](const auto& d) -> State {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BlackBoxDynamics>) {
          return d.sample(s, a, rng);
        } else {
          return sample_next(d, s, a, rng);
        }
      },
      mdp.dynamics);
}

void TabularMdp::validate() const {
  if (n_states < 1 || n_actions < 1 || horizon < 1) throw PreconditionError("TabularMdp: sizes must be positive");
  if (initial_state < 0 || initial_state >= n_states) throw DimensionError("TabularMdp: initial state out of range");
  const auto rows = static_cast<std::size_t>(n_states * n_actions);
  if (reward.size() != rows || transition.size() != rows) throw DimensionError("TabularMdp: table sizes");
  for (const auto& p : transition) {
    if (p.size() != n_states) throw DimensionError("TabularMdp: transition row length");
    if (p.minCoeff() < 0.0 || std::abs(p.sum() - 1.0) > 1e-9) {
      throw PreconditionError("TabularMdp: transition row is not a distribution");
    }
  }
}

MdpSpec TabularMdp::to_spec() const {
  validate();
  MdpSpec spec;
  spec.horizon = horizon;
  spec.initial_state = encode_index(initial_state);
  auto rewards = std::make_shared<std::vector<double>>(reward);
  const int na = n_actions;
  const int ns = n_states;
  spec.reward = [rewards, na, ns](const State& s, const Action& a) {
    return (*rewards)[static_cast<std::size_t>(index_of(s, ns) * na + index_of(a, na))];
  };
  spec.dynamics = TransitionModel(TabularTransition(n_states, n_actions, transition));
  return spec;
}

TabularMdp to_tabular(const MdpSpec& mdp) {
  const auto* model = std::get_if<TransitionModel>(&mdp.dynamics);
  if (!model || !is_tabular(*model)) throw UnsupportedModel("exact tabular routine called on a non-tabular MDP");
  TabularMdp out;
  std::tie(out.n_states, out.n_actions) = tabular_shape(*model);
  out.horizon = mdp.horizon;
  out.initial_state = index_of(mdp.initial_state, out.n_states);
  for (int s = 0; s < out.n_states; ++s) {
    for (int a = 0; a < out.n_actions; ++a) {
      out.reward.push_back(mdp.reward(encode_index(s), encode_index(a)));
      out.transition.push_back(next_distribution(*model, s, a));
    }
  }
  return out;
}

TabularPolicy::TabularPolicy(int horizon, int n_states, int n_actions, std::vector<Matrix> probs)
    : horizon_(horizon), n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
  if (horizon_ < 1 || n_states_ < 1 || n_actions_ < 1) throw PreconditionError("TabularPolicy: sizes must be positive");
  if (probs_.size() != static_cast<std::size_t>(horizon_)) throw DimensionError("TabularPolicy: one table per step");
  for (const auto& m : probs_) {
    if (m.rows() != n_states_ || m.cols() != n_actions_) throw DimensionError("TabularPolicy: table shape");
    for (Eigen::Index s = 0; s < m.rows(); ++s) {
      if (m.row(s).minCoeff() < 0.0 || std::abs(m.row(s).sum() - 1.0) > 1e-9) {
        throw PreconditionError("TabularPolicy: rows must be distributions");
      }
    }
  }
}

TabularPolicy TabularPolicy::deterministic(int n_actions, const std::vector<std::vector<int>>& actions) {
  if (actions.empty() || actions.front().empty()) throw PreconditionError("TabularPolicy: empty action table");
  const int ns = static_cast<int>(actions.front().size());
  std::vector<Matrix> probs;
  for (const auto& row : actions) {
    if (static_cast<int>(row.size()) != ns) throw DimensionError("TabularPolicy: ragged action table");
    Matrix m = Matrix::Zero(ns, n_actions);
    for (int s = 0; s < ns; ++s) {
      if (row[s] < 0 || row[s] >= n_actions) throw DimensionError("TabularPolicy: action out of range");
      m(s, row[s]) = 1.0;
    }
    probs.push_back(std::move(m));
  }
  return TabularPolicy(static_cast<int>(actions.size()), ns, n_actions, std::move(probs));
}

TabularPolicy TabularPolicy::uniform(int horizon, int n_states, int n_actions) {
  std::vector<Matrix> probs(static_cast<std::size_t>(horizon),
                            Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
  return TabularPolicy(horizon, n_states, n_actions, std::move(probs));
}

int TabularPolicy::greedy(int h, int s) const {
  Eigen::Index best = 0;
  probs(h).row(s).maxCoeff(&best);
  return static_cast<int>(best);
}

int TabularPolicy::sample(int h, int s, Rng& rng) const {
  const auto& row = probs(h).row(s);
  int nonzero = 0;
  int last = 0;
  for (int a = 0; a < n_actions_; ++a) {
    if (row(a) > 0.0) {
      ++nonzero;
      last = a;
    }
  }
  // Deterministic rows consume no randomness.
  if (nonzero == 1) return last;
  return sample_index(row.transpose(), rng);
}

Policy::Policy(std::string kind, Factory factory) : kind_(std::move(kind)), factory_(std::move(factory)) {}

Policy Policy::stateless(std::string kind, std::function<Action(const State&, int, Rng&)> fn) {
  auto shared = std::make_shared<std::function<Action(const State&, int, Rng&)>>(std::move(fn));
  return Policy(std::move(kind), [shared]() -> Controller { return *shared; });
}

Policy Policy::tabular(TabularPolicy table) {
  auto t = std::make_shared<const TabularPolicy>(std::move(table));
  Policy p("tabular", [t]() -> Controller {
    return [t](const State& s, int step, Rng& rng) {
      if (step < 0 || step >= t->horizon()) throw PreconditionError("tabular policy: step beyond horizon");
      return encode_index(t->sample(step, index_of(s, t->n_states()), rng));
    };
  });
  p.table_ = std::move(t);
  return p;
}

Policy Policy::uniform_box(int action_dim, double lo, double hi) {
  return stateless("uniform", [action_dim, lo, hi](const State&, int, Rng& rng) {
    Action a(action_dim);
    for (int i = 0; i < action_dim; ++i) a(i) = rng.uniform(lo, hi);
    return a;
  });
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& t : steps) total += t.reward;
  return total;
}

Trajectory rollout(const Policy& policy, const MdpSpec& mdp, Rng& rng) {
  if (mdp.horizon < 1) throw PreconditionError("rollout: horizon must be >= 1");
  Trajectory traj;
  traj.steps.reserve(static_cast<std::size_t>(mdp.horizon));
  auto controller = policy.begin_episode();
  State s = mdp.initial_state;
  for (int h = 0; h < mdp.horizon; ++h) {
    Action a = controller(s, h, rng);
    const double r = checked_reward(mdp, s, a);
    State next = step_dynamics(mdp, s, a, rng);
    check_finite(next, h);
    traj.steps.push_back({s, std::move(a), r, next});
    s = std::move(next);
  }
  return traj;
}

OccupancySample d_pi_sample(const Policy& policy, const MdpSpec& mdp, Rng& rng) {
  if (mdp.horizon < 1) throw PreconditionError("d_pi_sample: horizon must be >= 1");
  const int h = rng.uniform_int(mdp.horizon);
  auto controller = policy.begin_episode();
  State s = mdp.initial_state;
  for (int t = 0;; ++t) {
    Action a = controller(s, t, rng);
    if (t == h) return {s, std::move(a), h};
    State next = step_dynamics(mdp, s, a, rng);
    check_finite(next, t);
    s = std::move(next);
  }
}

std::vector<OccupancySample> d_pi_samples(const Policy& policy, const MdpSpec& mdp, int n, Rng& rng) {
  std::vector<OccupancySample> out(static_cast<std::size_t>(std::max(0, n)));
  const std::uint64_t base = rng.fork_key();
  parallel_for(out.size(), [&](std::size_t i) {
    Rng child = Rng::child(base, i);
    out[i] = d_pi_sample(policy, mdp, child);
  });
  return out;
}

std::vector<Trajectory> rollouts(const Policy& policy, const MdpSpec& mdp, int n, Rng& rng) {
  std::vector<Trajectory> out(static_cast<std::size_t>(std::max(0, n)));
  const std::uint64_t base = rng.fork_key();
  parallel_for(out.size(), [&](std::size_t i) {
    Rng child = Rng::child(base, i);
    out[i] = rollout(policy, mdp, child);
  });
  return out;
}

ValueEstimate summarize_returns(const std::vector<double>& returns) {
  ValueEstimate est;
  const double n = static_cast<double>(returns.size());
  if (returns.empty()) return est;
  double sum = 0.0;
  for (double r : returns) sum += r;
  est.mean = sum / n;
  if (returns.size() > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - est.mean) * (r - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return est;
}

ValueEstimate estimate_value(const Policy& policy, const MdpSpec& mdp, int n_rollouts, Rng& rng) {
  if (n_rollouts < 1) throw PreconditionError("estimate_value: n_rollouts must be >= 1");
  const auto trajs = rollouts(policy, mdp, n_rollouts, rng);
  std::vector<double> returns;
  returns.reserve(trajs.size());
  for (const auto& t : trajs) returns.push_back(t.total_reward());
  return summarize_returns(returns);
}

namespace {

void check_compatible(const TabularPolicy& policy, const TabularMdp& mdp) {
  mdp.validate();
  if (policy.n_states() != mdp.n_states || policy.n_actions() != mdp.n_actions || policy.horizon() < mdp.horizon) {
    throw DimensionError("tabular policy does not match the MDP");
  }
}

}  // namespace

std::vector<Vector> policy_values(const TabularPolicy& policy, const TabularMdp& mdp) {
  check_compatible(policy, mdp);
  std::vector<Vector> v(static_cast<std::size_t>(mdp.horizon + 1), Vector::Zero(mdp.n_states));
  for (int h = mdp.horizon - 1; h >= 0; --h) {
    const Vector& next = v[static_cast<std::size_t>(h + 1)];
    Vector& cur = v[static_cast<std::size_t>(h)];
    for (int s = 0; s < mdp.n_states; ++s) {
      double total = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        const double pa = policy.prob(h, s, a);
        if (pa == 0.0) continue;
        total += pa * (mdp.r(s, a) + mdp.p(s, a).dot(next));
      }
      cur(s) = total;
    }
  }
  return v;
}

double exact_value_tabular(const TabularPolicy& policy, const TabularMdp& mdp) {
  return policy_values(policy, mdp)[0](mdp.initial_state);
}

double exact_value_tabular(const Policy& policy, const MdpSpec& mdp) {
  const TabularPolicy* table = policy.table();
  if (!table) throw UnsupportedModel("exact_value_tabular: policy is not tabular");
  return exact_value_tabular(*table, to_tabular(mdp));
}

std::vector<Matrix> exact_occupancy(const TabularPolicy& policy, const TabularMdp& mdp) {
  check_compatible(policy, mdp);
  std::vector<Matrix> d;
  d.reserve(static_cast<std::size_t>(mdp.horizon));
  Vector state_dist = Vector::Zero(mdp.n_states);
  state_dist(mdp.initial_state) = 1.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    Matrix dh = state_dist.asDiagonal() * policy.probs(h);
    Vector next = Vector::Zero(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        if (dh(s, a) != 0.0) next += dh(s, a) * mdp.p(s, a);
      }
    }
    d.push_back(std::move(dh));
    state_dist = std::move(next);
  }
  return d;
}

Matrix exact_average_occupancy(const TabularPolicy& policy, const TabularMdp& mdp) {
  const auto d = exact_occupancy(policy, mdp);
  Matrix avg = Matrix::Zero(mdp.n_states, mdp.n_actions);
  for (const auto& dh : d) avg += dh;
  return avg / static_cast<double>(mdp.horizon);
}

SimulationGap simulation_gap(const TabularPolicy& policy, const TabularMdp& truth, const TabularMdp& model) {
  if (truth.n_states != model.n_states || truth.n_actions != model.n_actions || truth.horizon != model.horizon ||
      truth.initial_state != model.initial_state) {
    throw DimensionError("simulation_gap: MDPs must share S, A, H and s0");
  }
  const auto v_model = policy_values(policy, model);
  const double j_model = v_model[0](model.initial_state);
  const double j_truth = exact_value_tabular(policy, truth);
  const auto occupancy = exact_occupancy(policy, truth);
  double rhs = 0.0;
  for (int h = 0; h < truth.horizon; ++h) {
    const Vector& v_next = v_model[static_cast<std::size_t>(h + 1)];
    const Matrix& dh = occupancy[static_cast<std::size_t>(h)];
    for (int s = 0; s < truth.n_states; ++s) {
      for (int a = 0; a < truth.n_actions; ++a) {
        if (dh(s, a) == 0.0) continue;
        const double term = model.r(s, a) - truth.r(s, a) + (model.p(s, a) - truth.p(s, a)).dot(v_next);
        rhs += dh(s, a) * term;
      }
    }
  }
  return {j_model - j_truth, rhs};
}

}  // namespace pcmlp
