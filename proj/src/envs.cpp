#include "pcmlp/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcmlp/errors.hpp"

namespace pcmlp {

const char* family_name(EnvFamily f) {
  switch (f) {
    case EnvFamily::kKnr: return "knr";
    case EnvFamily::kLinMdp: return "linmdp";
    case EnvFamily::kBlackBox: return "blackbox";
    case EnvFamily::kTabular: return "tabular";
  }
  return "unknown";
}

int GridSpec::cell_count() const {
  int n = 1;
  for (int b : bins) n *= b;
  return n;
}

int GridSpec::cell(const State& s) const {
  int index = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const int dim = dims[i];
    if (dim >= s.size()) throw DimensionError("GridSpec: state has too few coordinates");
    const auto k = static_cast<Eigen::Index>(i);
    const double u = (s(dim) - lo(k)) / (hi(k) - lo(k));
    const int b = std::clamp(static_cast<int>(std::floor(u * bins[i])), 0, bins[i] - 1);
    index = index * bins[i] + b;
  }
  return index;
}

CoverageTracker::CoverageTracker(GridSpec grid) : grid_(std::move(grid)) {
  if (grid_.dims.empty() || grid_.dims.size() != grid_.bins.size()) throw PreconditionError("GridSpec: malformed");
  seen_.assign(static_cast<std::size_t>(grid_.cell_count()), 0);
}

void CoverageTracker::add(const Trajectory& t) {
  auto mark = [&](const State& s) {
    char& c = seen_[static_cast<std::size_t>(grid_.cell(s))];
    if (!c) {
      c = 1;
      ++count_;
    }
  };
  for (const auto& step : t.steps) mark(step.state);
  if (!t.steps.empty()) mark(t.steps.back().next_state);
}

double CoverageTracker::fraction() const { return static_cast<double>(count_) / static_cast<double>(seen_.size()); }

double coverage_metric(std::span<const Trajectory> trajectories, const GridSpec& grid) {
  CoverageTracker tracker(grid);
  for (const auto& t : trajectories) tracker.add(t);
  return tracker.fraction();
}

Policy EnvInstance::uniform_policy() const {
  if (continuous()) return Policy::uniform_box(action_dim, action_lo, action_hi);
  return Policy::tabular(TabularPolicy::uniform(mdp.horizon, table->n_states, table->n_actions));
}

namespace {

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Matrix with_spectral_norm(Matrix m, double target) {
  const double n = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  return n > 0 ? Matrix(m * (target / n)) : m;
}

}  // namespace

EnvInstance make_linear_system(const LinearSystemParams& p) {
  if (p.state_dim < 1 || p.action_dim < 1 || p.sigma < 0 || p.horizon < 1) {
    throw PreconditionError("make_linear_system: invalid parameters");
  }
  if (p.a_norm > 0.95) throw PreconditionError("make_linear_system: A must have spectral norm <= 0.95");
  Rng rng = Rng::stream(p.seed, "env/linear-system");
  const Matrix A = with_spectral_norm(gaussian_matrix(p.state_dim, p.state_dim, rng), p.a_norm);
  const Matrix B = with_spectral_norm(gaussian_matrix(p.state_dim, p.action_dim, rng), p.b_norm);
  const double R = p.feature_radius;

  Matrix W(p.state_dim, p.state_dim + p.action_dim);
  W << R * A, R * B;
  EnvInstance env;
  env.name = "linear-system";
  env.family = EnvFamily::kKnr;
  env.state_dim = p.state_dim;
  env.action_dim = p.action_dim;
  env.action_lo = -1.0;
  env.action_hi = 1.0;
  env.features = FeatureMap::linear(p.state_dim + p.action_dim, R);
  env.bonus_features = p.bonus_rff_dim > 0
                           ? FeatureMap::rff(p.state_dim + p.action_dim, p.bonus_rff_dim, p.bonus_bandwidth,
                                             mix_seed(p.seed, hash_name("env/linear-system/rff")))
                           : env.features;
  env.knr_truth = KnrModel(W, p.sigma, W.norm() > 0 ? W.norm() : 1.0);
  const KnrTransition truth{*env.knr_truth, env.features};

  env.mdp.horizon = p.horizon;
  env.mdp.initial_state = Vector::Zero(p.state_dim);
  env.mdp.initial_state(0) = p.start;
  env.mdp.reward = [rho2 = p.reward_radius * p.reward_radius](const State& s, const Action&) {
    return 1.0 - std::min(1.0, s.squaredNorm() / rho2);
  };
  env.mean_step = [truth, lo = env.action_lo, hi = env.action_hi](const State& s, const Action& a) -> State {
    return truth.model.mean(truth.phi(s, a.cwiseMax(lo).cwiseMin(hi)));
  };
  // Actions are clipped to the box before they reach the dynamics.
  env.mdp.dynamics = BlackBoxDynamics{
      [truth, lo = env.action_lo, hi = env.action_hi](const State& s, const Action& a, Rng& r) -> State {
        return knr_sample(truth.model, truth.phi(s, a.cwiseMax(lo).cwiseMin(hi)), r);
      },
      env.mean_step};

  const double extent = 1.5;
  env.grid.dims.resize(static_cast<std::size_t>(std::min(p.state_dim, 2)));
  for (std::size_t i = 0; i < env.grid.dims.size(); ++i) env.grid.dims[i] = static_cast<int>(i);
  const auto gd = static_cast<Eigen::Index>(env.grid.dims.size());
  env.grid.lo = Vector::Constant(gd, -extent);
  env.grid.hi = Vector::Constant(gd, extent);
  env.grid.bins.assign(env.grid.dims.size(), 20);
  return env;
}

EnvInstance make_linear_system(int state_dim, int action_dim, double sigma, std::uint64_t seed) {
  LinearSystemParams p;
  p.state_dim = state_dim;
  p.action_dim = action_dim;
  p.sigma = sigma;
  p.seed = seed;
  return make_linear_system(p);
}

EnvInstance make_sparse_hill(const SparseHillParams& p) {
  if (p.horizon < 1 || !(p.x_min < p.goal_x && p.goal_x < p.x_max) || p.noise < 0 || p.rff_dim < 1) {
    throw PreconditionError("make_sparse_hill: invalid parameters");
  }
  EnvInstance env;
  env.name = "sparse-hill";
  env.family = EnvFamily::kBlackBox;
  env.state_dim = 2;
  env.action_dim = 1;
  env.action_lo = -1.0;
  env.action_hi = 1.0;

  auto mean = [p](const State& s, const Action& a) -> State {
    const double u = std::clamp(a(0), -1.0, 1.0);
    double v = std::clamp(s(1) + p.power * u - p.gravity * std::cos(3.0 * s(0)), -p.max_speed, p.max_speed);
    double x = s(0) + v;
    if (x <= p.x_min) {
      x = p.x_min;
      v = std::max(v, 0.0);
    } else if (x >= p.x_max) {
      x = p.x_max;
      v = std::min(v, 0.0);
    }
    State next(2);
    next << x, v;
    return next;
  };
  env.mean_step = mean;
  env.mdp.horizon = p.horizon;
  env.mdp.initial_state = Vector(2);
  env.mdp.initial_state << p.start_x, 0.0;
  env.goal = [goal = p.goal_x](const State& s) { return s(0) >= goal; };
  env.mdp.reward = [p](const State& s, const Action& a) {
    if (s(0) >= p.goal_x) return 1.0;
    const double u = std::clamp(a(0), -1.0, 1.0);
    return p.control_weight * (1.0 - u * u);
  };
  env.mdp.dynamics = BlackBoxDynamics{[p, mean](const State& s, const Action& a, Rng& rng) -> State {
                                        State next = mean(s, a);
                                        if (p.noise > 0) {
                                          next(1) = std::clamp(next(1) + p.noise * rng.normal(), -p.max_speed,
                                                               p.max_speed);
                                        }
                                        return next;
                                      },
                                      mean};

  // Model features on z = (x, v, a): a linear block plus random Fourier
  // features on a rescaled input.
  Vector scale(3);
  scale << 0.5, 0.1, 1.0;
  const double radius = std::sqrt(p.x_min * p.x_min + p.max_speed * p.max_speed + 1.0);
  env.features = FeatureMap::concat(
      {FeatureMap::linear(3, radius), FeatureMap::rff(3, p.rff_dim, p.bandwidth, mix_seed(p.seed, hash_name("env/sparse-hill/rff")), scale)});
  env.bonus_features = env.features;

  env.grid.dims = {0, 1};
  env.grid.lo = Vector(2);
  env.grid.lo << p.x_min, -p.max_speed;
  env.grid.hi = Vector(2);
  env.grid.hi << p.x_max, p.max_speed;
  env.grid.bins = {20, 20};
  return env;
}

EnvInstance make_sparse_hill(std::uint64_t seed) {
  SparseHillParams p;
  p.seed = seed;
  return make_sparse_hill(p);
}

EnvInstance make_tabular_linmdp(const TabularLinmdpParams& p) {
  const int nS = p.n_states;
  const int nA = p.n_actions;
  if (nS < 2 || nA < 1 || p.n_candidates < 1 || p.horizon < 1) throw PreconditionError("make_tabular_linmdp: sizes");
  if (p.tv_gap < 0 || p.uniform_mix < 0 || p.uniform_mix > 1) throw PreconditionError("make_tabular_linmdp: gap or mix");
  Rng rng = Rng::stream(p.seed, "env/tabular-linmdp");
  const int d = nS * nA;

  // Truth: mu(s') row s' has entry (s, a) = P(s' | s, a).
  Matrix truth(nS, d);
  for (int c = 0; c < d; ++c) {
    Vector row(nS);
    for (int s = 0; s < nS; ++s) row(s) = -std::log(1.0 - rng.uniform());
    row /= row.sum();
    truth.col(c) = (1.0 - p.uniform_mix) * row + Vector::Constant(nS, p.uniform_mix / nS);
  }
  const double max_mass = truth.maxCoeff();
  if (p.tv_gap > 1.0 - max_mass + 1e-12) {
    throw PreconditionError("make_tabular_linmdp: tv_gap too large for the generated rows");
  }

  auto candidates = std::make_shared<LinearMdpModel::Candidates>();
  const auto truth_pos = static_cast<std::size_t>(rng.uniform_int(p.n_candidates));
  int decoy = 0;
  for (int k = 0; k < p.n_candidates; ++k) {
    if (static_cast<std::size_t>(k) == truth_pos) {
      candidates->push_back(truth);
      continue;
    }
    const int j = decoy++ % nS;
    Matrix mu = truth;
    for (int c = 0; c < d; ++c) {
      // q = (1 - alpha) p + alpha e_j has TV(q, p) = alpha (1 - p_j) = tv_gap.
      const double alpha = p.tv_gap / (1.0 - truth(j, c));
      mu.col(c) *= (1.0 - alpha);
      mu(j, c) += alpha;
    }
    candidates->push_back(std::move(mu));
  }

  EnvInstance env;
  env.name = "tabular-linmdp";
  env.family = EnvFamily::kLinMdp;
  env.features = FeatureMap::one_hot(nS, nA);
  env.bonus_features = env.features;
  env.candidates = candidates;
  env.truth_index = truth_pos;

  TabularMdp table;
  table.n_states = nS;
  table.n_actions = nA;
  table.horizon = p.horizon;
  table.initial_state = 0;
  for (int s = 0; s < nS; ++s) {
    for (int a = 0; a < nA; ++a) {
      table.reward.push_back(rng.uniform());
      table.transition.push_back(truth.col(s * nA + a));
    }
  }
  env.mdp = table.to_spec();
  env.mdp.dynamics = TransitionModel(LinearMdpModel(candidates, truth_pos, env.features, nS, nA));
  env.table = std::move(table);

  env.grid.dims = {0};
  env.grid.lo = Vector::Constant(1, -0.5);
  env.grid.hi = Vector::Constant(1, nS - 0.5);
  env.grid.bins = {nS};
  return env;
}

EnvInstance make_tabular_linmdp(int n_states, int n_actions, int n_candidates, std::uint64_t seed) {
  TabularLinmdpParams p;
  p.n_states = n_states;
  p.n_actions = n_actions;
  p.n_candidates = n_candidates;
  p.seed = seed;
  return make_tabular_linmdp(p);
}

EnvInstance make_chain(const ChainParams& p) {
  const int n = p.n_states;
  if (n < 2 || p.horizon < 1 || p.start < 0 || p.start >= n) throw PreconditionError("make_chain: invalid parameters");
  TabularMdp table;
  table.n_states = n;
  table.n_actions = 2;
  table.horizon = p.horizon;
  table.initial_state = p.start;
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < 2; ++a) {
      Vector row = Vector::Zero(n);
      row(std::clamp(a == 0 ? s - 1 : s + 1, 0, n - 1)) = 1.0;
      table.transition.push_back(row);
      table.reward.push_back(s == n - 1 ? 1.0 : 0.0);
    }
  }
  EnvInstance env;
  env.name = "chain";
  env.family = EnvFamily::kTabular;
  env.features = FeatureMap::one_hot(n, 2);
  env.bonus_features = env.features;
  env.mdp = table.to_spec();
  // The truth as a one-candidate linear MDP, so the tabular planner applies.
  Matrix mu(n, 2 * n);
  for (int c = 0; c < 2 * n; ++c) mu.col(c) = table.transition[static_cast<std::size_t>(c)];
  auto candidates = std::make_shared<LinearMdpModel::Candidates>(1, mu);
  env.candidates = candidates;
  env.mdp.dynamics = TransitionModel(LinearMdpModel(candidates, 0, env.features, n, 2));
  env.table = std::move(table);
  env.grid.dims = {0};
  env.grid.lo = Vector::Constant(1, -0.5);
  env.grid.hi = Vector::Constant(1, n - 0.5);
  env.grid.bins = {n};
  return env;
}

std::vector<CatalogEntry> list_envs() {
  return {
      {"linear-system", "knr", "stable linear system s' = As + Ba + noise, quadratic state reward"},
      {"sparse-hill", "blackbox", "car in a valley; reward only at the hilltop, small control cost elsewhere"},
      {"tabular-linmdp", "linmdp", "random one-hot linear MDP with a finite candidate list containing the truth"},
      {"chain", "tabular", "deterministic left/right chain, reward at the right end"},
  };
}

}  // namespace pcmlp
