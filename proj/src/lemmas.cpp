#include "pcmlp/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pcmlp/cover.hpp"
#include "pcmlp/envs.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/mle.hpp"
#include "pcmlp/parallel.hpp"
#include "pcmlp/pcmlp.hpp"

namespace pcmlp {

namespace {

Vector random_simplex(int n, Rng& rng) {
  Vector p(n);
  for (int i = 0; i < n; ++i) p(i) = -std::log(1.0 - rng.uniform());
  return p / p.sum();
}

Vector random_ball_vector(int d, Rng& rng) {
  Vector g(d);
  for (int i = 0; i < d; ++i) g(i) = rng.normal();
  const double n = g.norm();
  if (n == 0) return g;
  return g * (rng.uniform() / n);
}

int between(Rng& rng, int lo, int hi) { return lo + rng.uniform_int(hi - lo + 1); }

}  // namespace

TabularMdp random_tabular_mdp(int n_states, int n_actions, int horizon, Rng& rng) {
  TabularMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.horizon = horizon;
  m.initial_state = 0;
  for (int k = 0; k < n_states * n_actions; ++k) {
    m.reward.push_back(rng.uniform());
    m.transition.push_back(random_simplex(n_states, rng));
  }
  return m;
}

TabularPolicy random_policy(int horizon, int n_states, int n_actions, Rng& rng, bool deterministic) {
  if (deterministic) {
    std::vector<std::vector<int>> table(static_cast<std::size_t>(horizon));
    for (auto& row : table) {
      for (int s = 0; s < n_states; ++s) row.push_back(rng.uniform_int(n_actions));
    }
    return TabularPolicy::deterministic(n_actions, table);
  }
  std::vector<Matrix> probs;
  for (int h = 0; h < horizon; ++h) {
    Matrix m(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) m.row(s) = random_simplex(n_actions, rng).transpose();
    probs.push_back(std::move(m));
  }
  return TabularPolicy(horizon, n_states, n_actions, std::move(probs));
}

Matrix random_feature_covariance(int d, int k, Rng& rng) {
  std::vector<Vector> f;
  for (int i = 0; i < k; ++i) f.push_back(random_ball_vector(d, rng));
  return covariance_from_features(f, d);
}

double simulation_lemma_max_gap(int instances, std::uint64_t seed) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    Rng rng = Rng::stream(seed, "lemma/simulation", static_cast<std::uint64_t>(i));
    const int nS = between(rng, 1, 5);
    const int nA = between(rng, 1, 3);
    const int H = between(rng, 1, 4);
    const TabularMdp truth = random_tabular_mdp(nS, nA, H, rng);
    TabularMdp model = truth;
    for (std::size_t k = 0; k < model.transition.size(); ++k) {
      const double mix = rng.uniform();
      model.transition[k] = (1 - mix) * truth.transition[k] + mix * random_simplex(nS, rng);
      model.reward[k] = truth.reward[k] + rng.uniform(-0.5, 0.5);
    }
    const TabularPolicy pi = random_policy(H, nS, nA, rng);
    const SimulationGap g = simulation_gap(pi, truth, model);
    worst = std::max(worst, std::abs(g.lhs - g.rhs));
  }
  return worst;
}

namespace {

struct RandomSequence {
  std::vector<Matrix> covs;
  double lambda = 1.0;
  int d = 1;
};

RandomSequence random_sequence(std::uint64_t seed, const char* name, int i) {
  Rng rng = Rng::stream(seed, name, static_cast<std::uint64_t>(i));
  RandomSequence s;
  s.d = between(rng, 1, 8);
  const int N = between(rng, 1, 20);
  s.lambda = rng.uniform(1.0, 2.0);
  for (int n = 0; n < N; ++n) {
    // Occasionally zero or rank-one terms.
    const double u = rng.uniform();
    if (u < 0.1) {
      s.covs.push_back(Matrix::Zero(s.d, s.d));
    } else if (u < 0.3) {
      const Vector v = random_ball_vector(s.d, rng);
      s.covs.push_back(v * v.transpose());
    } else {
      s.covs.push_back(random_feature_covariance(s.d, between(rng, 1, 10), rng));
    }
  }
  return s;
}

}  // namespace

double trace_telescope_min_slack(int trials, std::uint64_t seed) {
  double slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    const RandomSequence s = random_sequence(seed, "lemma/telescope", i);
    const TelescopeSides t = trace_telescope_check(s.covs, s.lambda);
    slack = std::min(slack, t.lhs - t.rhs);
  }
  return slack;
}

double information_gain_max_excess(int trials, std::uint64_t seed) {
  double excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    const RandomSequence s = random_sequence(seed, "lemma/info-gain", i);
    const double bound = s.d * std::log(1.0 + static_cast<double>(s.covs.size()) / s.lambda);
    excess = std::max(excess, information_gain(s.covs, s.lambda) - bound);
  }
  return excess;
}

int concentration_sample_size(int N, int d, double lambda, double delta) {
  return static_cast<int>(std::ceil(32.0 * N * N * std::log(8.0 * N * d / delta) / (lambda * lambda)));
}

SandwichTrials sandwich_trials(int N, int d, double lambda, double delta, int seeds, int probes, std::uint64_t seed) {
  SandwichTrials out;
  out.K = concentration_sample_size(N, d, lambda, delta);
  out.worst_low = std::numeric_limits<double>::infinity();
  out.worst_high = 0.0;
  int quad_ok = 0;
  int ratio_ok = 0;
  const int nS = 3;
  const int nA = 3;
  const int H = 4;
  for (int t = 0; t < seeds; ++t) {
    Rng rng = Rng::stream(seed, "lemma/sandwich", static_cast<std::uint64_t>(t));
    const TabularMdp mdp = random_tabular_mdp(nS, nA, H, rng);
    auto table = std::make_shared<std::vector<Vector>>();
    for (int k = 0; k < nS * nA; ++k) table->push_back(random_ball_vector(d, rng));
    const FeatureMap phi = FeatureMap::custom(d, [table, nS, nA](const State& s, const Action& a) {
      return (*table)[static_cast<std::size_t>(index_of(s, nS) * nA + index_of(a, nA))];
    });
    const MdpSpec spec = mdp.to_spec();
    std::vector<Matrix> exact;
    std::vector<Matrix> empirical;
    for (int n = 0; n < N; ++n) {
      const TabularPolicy pi = random_policy(H, nS, nA, rng);
      const Matrix occ = exact_average_occupancy(pi, mdp);
      Matrix cov = Matrix::Zero(d, d);
      for (int s = 0; s < nS; ++s) {
        for (int a = 0; a < nA; ++a) {
          const Vector& f = (*table)[static_cast<std::size_t>(s * nA + a)];
          cov += occ(s, a) * f * f.transpose();
        }
      }
      exact.push_back(cov);
      empirical.push_back(estimate_policy_cov(Policy::tabular(pi), spec, phi, out.K, rng));
    }
    std::vector<Vector> xs;
    for (int i = 0; i < probes; ++i) {
      Vector g(d);
      for (int j = 0; j < d; ++j) g(j) = rng.normal();
      xs.push_back(g.normalized());
    }
    const SandwichStats st = bonus_sandwich_check(exact, empirical, xs, 1.0, H, lambda);
    quad_ok += st.quad_within ? 1 : 0;
    ratio_ok += st.ratio_within ? 1 : 0;
    out.worst_low = std::min(out.worst_low, st.min_quad_ratio);
    out.worst_high = std::max(out.worst_high, st.max_quad_ratio);
  }
  out.quad_rate = static_cast<double>(quad_ok) / seeds;
  out.ratio_rate = static_cast<double>(ratio_ok) / seeds;
  return out;
}

RiskDecay sgd_risk_decay(int seeds, int m_small, int m_large, double sigma, std::uint64_t seed) {
  const int d = 4;
  const int ds = 2;
  const double F = 1.0;
  RiskDecay out;
  for (int t = 0; t < seeds; ++t) {
    Rng rng = Rng::stream(seed, "lemma/sgd", static_cast<std::uint64_t>(t));
    Matrix w_star(ds, d);
    for (int i = 0; i < ds; ++i) {
      for (int j = 0; j < d; ++j) w_star(i, j) = rng.normal();
    }
    w_star *= 0.8 * F / w_star.norm();
    const KnrModel truth(w_star, sigma, F);
    for (const int M : {m_small, m_large}) {
      std::vector<KnrSample> data;
      data.reserve(static_cast<std::size_t>(M));
      for (int i = 0; i < M; ++i) {
        Vector g(d);
        for (int j = 0; j < d; ++j) g(j) = rng.normal();
        const Vector phi = g.normalized();
        data.push_back({phi, knr_sample(truth, phi, rng)});
      }
      SgdConfig cfg;
      cfg.F = F;
      cfg.B = state_norm_bound(F, sigma, ds, M, 0.01);
      const KnrModel fit = fit_knr_sgd(data, cfg, sigma);
      // E[phi phi^T] = I / d for phi uniform on the sphere.
      const double risk = knr_squared_risk(fit.weights(), w_star, Matrix::Identity(d, d) / d);
      (M == m_small ? out.risk_small : out.risk_large) += risk / seeds;
    }
  }
  out.ratio = out.risk_large > 0 ? out.risk_small / out.risk_large : std::numeric_limits<double>::infinity();
  return out;
}

IdentificationTrials mle_identification_trials(int seeds, int n_candidates, double tv_gap, int M, std::uint64_t seed) {
  IdentificationTrials out;
  out.min_pairwise_tv = std::numeric_limits<double>::infinity();
  int hits = 0;
  for (int t = 0; t < seeds; ++t) {
    TabularLinmdpParams p;
    p.n_candidates = n_candidates;
    p.tv_gap = tv_gap;
    p.seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    const EnvInstance env = make_tabular_linmdp(p);
    const auto& cands = *env.candidates;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      for (std::size_t j = i + 1; j < cands.size(); ++j) {
        const double tv = 0.5 * (cands[i] - cands[j]).cwiseAbs().colwise().sum().minCoeff();
        out.min_pairwise_tv = std::min(out.min_pairwise_tv, tv);
      }
    }
    Rng rng = Rng::stream(seed, "lemma/mle", static_cast<std::uint64_t>(t));
    PolicyCover cover;
    cover.policies.push_back(env.uniform_policy());
    for (int k = 0; k < 2; ++k) {
      cover.policies.push_back(Policy::tabular(random_policy(p.horizon, p.n_states, p.n_actions, rng, true)));
    }
    std::vector<TabularSample> data;
    for (int i = 0; i < M; ++i) {
      const OccupancySample x = mixture_sample(cover, env.mdp, rng);
      const State next = step_dynamics(env.mdp, x.state, x.action, rng);
      data.push_back({index_of(x.state, p.n_states), index_of(x.action, p.n_actions), index_of(next, p.n_states)});
    }
    const auto& model = std::get<LinearMdpModel>(std::get<TransitionModel>(env.mdp.dynamics));
    hits += fit_linmdp_exact(data, model).index == env.truth_index ? 1 : 0;
  }
  out.rate = static_cast<double>(hits) / seeds;
  return out;
}

OptimismTrials optimism_trials(int seeds, int iterations, std::uint64_t seed) {
  OptimismTrials out;
  out.min_margin = std::numeric_limits<double>::infinity();
  int ok = 0;
  int bound_ok = 0;
  for (int t = 0; t < seeds; ++t) {
    TabularLinmdpParams p;
    p.n_states = 4;
    p.n_actions = 2;
    p.horizon = 3;
    p.seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    const EnvInstance env = make_tabular_linmdp(p);
    PcmlpConfig cfg;
    cfg.N = iterations;
    cfg.K = 200;
    cfg.M = 200;
    cfg.lambda = 1.0;
    cfg.bonus_scale = 1.0;
    cfg.schedule = CSchedule::kTheoreticalLinmdp;
    cfg.planner = PlannerKind::kTabular;
    cfg.family = ModelFamily::kLinMdp;
    cfg.sampling = SamplingMode::kTruncated;
    cfg.probe_count = 32;
    cfg.seed = p.seed;
    const PcmlpResult r = run_pcmlp(cfg, env);
    const double v_star = tabular_plan(*env.table).value;
    bool all = true;
    for (const auto& rec : r.records) {
      const double margin = *rec.plan_value_model - v_star;
      out.min_margin = std::min(out.min_margin, margin);
      all = all && margin >= -1e-12;
    }
    ok += all ? 1 : 0;
    bound_ok += regret_diagnostic(r.records, v_star, p.horizon).within_bound ? 1 : 0;
  }
  out.rate = static_cast<double>(ok) / seeds;
  out.regret_bound_rate = static_cast<double>(bound_ok) / seeds;
  return out;
}

double feasibility_trials(int seeds, int M, int n_models, int N, double delta, std::uint64_t seed) {
  int ok = 0;
  for (int t = 0; t < seeds; ++t) {
    TabularLinmdpParams p;
    p.n_candidates = n_models;
    p.seed = mix_seed(seed, static_cast<std::uint64_t>(t));
    const EnvInstance env = make_tabular_linmdp(p);
    OdpcConfig cfg;
    cfg.N = N;
    cfg.M = M;
    cfg.delta = delta;
    cfg.seed = p.seed;
    ok += run_odpc(cfg, env).truth_always_feasible ? 1 : 0;
  }
  return static_cast<double>(ok) / seeds;
}

EluderInstance eluder_singleton_instance(double epsilon) {
  Rng rng(7);
  EluderInstance inst;
  inst.context = random_tabular_mdp(3, 2, 2, rng);
  inst.models.push_back(inst.context.transition);
  inst.policies = enumerate_deterministic_policies(3, 2, 2);
  inst.epsilon = epsilon;
  return inst;
}

EluderInstance eluder_separated_instance(double epsilon, double gap) {
  // One step from state 0: action 0 is where the models differ.
  EluderInstance inst;
  TabularMdp& c = inst.context;
  c.n_states = 2;
  c.n_actions = 2;
  c.horizon = 1;
  c.initial_state = 0;
  c.reward.assign(4, 0.0);
  for (int k = 0; k < 4; ++k) c.transition.push_back(Vector::Unit(2, 0));
  std::vector<Vector> other = c.transition;
  other[0] = Vector(2);
  other[0] << 1.0 - gap, gap;
  inst.models = {c.transition, other};
  inst.policies = {TabularPolicy::deterministic(2, {{0, 0}}), TabularPolicy::deterministic(2, {{1, 1}})};
  inst.epsilon = epsilon;
  return inst;
}

double gaussian_tv_quadrature(double mu1, double mu2, double sigma) {
  const double lo = std::min(mu1, mu2) - 12 * sigma;
  const double hi = std::max(mu1, mu2) + 12 * sigma;
  const int n = 40000;
  const double h = (hi - lo) / n;
  const double norm = 1.0 / (sigma * std::sqrt(2 * std::numbers::pi));
  auto f = [&](double x) {
    const double a = norm * std::exp(-0.5 * (x - mu1) * (x - mu1) / (sigma * sigma));
    const double b = norm * std::exp(-0.5 * (x - mu2) * (x - mu2) / (sigma * sigma));
    return std::abs(a - b);
  };
  double total = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) total += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return 0.5 * total * h / 3.0;
}

double gaussian_tv_min_margin(std::uint64_t seed, int cases) {
  Rng rng = Rng::stream(seed, "lemma/gaussian-tv");
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cases; ++i) {
    const double sigma = rng.uniform(0.1, 2.0);
    const double mu1 = rng.uniform(-1, 1);
    const double mu2 = mu1 + rng.uniform(0.0, 3.0) * sigma;
    const double bound = gaussian_tv_bound(Vector::Constant(1, mu1), Vector::Constant(1, mu2), sigma);
    margin = std::min(margin, bound - gaussian_tv_quadrature(mu1, mu2, sigma));
  }
  return margin;
}

State DoubleIntegrator::start() const {
  State s(2);
  s << x0, v0;
  return s;
}

State DoubleIntegrator::step(const State& s, double u) const {
  State n(2);
  n << s(0) + dt * s(1), s(1) + dt * u;
  return n;
}

double DoubleIntegrator::cost(const State& s, double u) const {
  return q_x * s(0) * s(0) + q_v * s(1) * s(1) + r_u * u * u;
}

double riccati_optimal_cost(const DoubleIntegrator& sys) {
  Eigen::Matrix2d A;
  A << 1, sys.dt, 0, 1;
  Eigen::Vector2d B(0, sys.dt);
  Eigen::Matrix2d Q = Eigen::Vector2d(sys.q_x, sys.q_v).asDiagonal();
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
  for (int t = sys.horizon - 1; t >= 0; --t) {
    const double g = sys.r_u + B.dot(P * B);
    const Eigen::RowVector2d k = (B.transpose() * P * A) / g;
    P = Q + A.transpose() * P * A - (A.transpose() * P * B) * k;
  }
  const Eigen::Vector2d s0(sys.x0, sys.v0);
  return s0.dot(P * s0);
}

double grid_dp_optimal_cost(const DoubleIntegrator& sys, const GridSpecDp& g) {
  const double hx = 2 * g.x_lim / (g.nx - 1);
  const double hv = 2 * g.v_lim / (g.nv - 1);
  Matrix V = Matrix::Zero(g.nx, g.nv);
  auto interp = [&](const Matrix& table, double x, double v) {
    const double fx = std::clamp((x + g.x_lim) / hx, 0.0, g.nx - 1.000001);
    const double fv = std::clamp((v + g.v_lim) / hv, 0.0, g.nv - 1.000001);
    const int i = static_cast<int>(fx);
    const int j = static_cast<int>(fv);
    const double a = fx - i;
    const double b = fv - j;
    return (1 - a) * (1 - b) * table(i, j) + a * (1 - b) * table(i + 1, j) + (1 - a) * b * table(i, j + 1) +
           a * b * table(i + 1, j + 1);
  };
  for (int t = sys.horizon - 1; t >= 0; --t) {
    Matrix next(g.nx, g.nv);
    parallel_for(static_cast<std::size_t>(g.nx), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      const double x = -g.x_lim + i * hx;
      for (int j = 0; j < g.nv; ++j) {
        const double v = -g.v_lim + j * hv;
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < g.nu; ++k) {
          const double u = -g.u_lim + 2 * g.u_lim * k / (g.nu - 1);
          const double c = sys.q_x * x * x + sys.q_v * v * v + sys.r_u * u * u +
                           interp(V, x + sys.dt * v, v + sys.dt * u);
          best = std::min(best, c);
        }
        next(i, j) = best;
      }
    });
    V = std::move(next);
  }
  return interp(V, sys.x0, sys.v0);
}

MppiSanity mppi_sanity(const MppiConfig& base, const DoubleIntegrator& sys, std::uint64_t seed) {
  MppiSanity out;
  ModelStep model = [sys](const State& s, const Action& a) { return sys.step(s, a(0)); };
  RewardFn reward = [sys](const State& s, const Action& a) { return -sys.cost(s, a(0)); };

  MppiConfig cfg = base;
  cfg.action_dim = 1;
  MppiPlanner planner(cfg, model, reward);
  Rng rng = Rng::stream(seed, "lemma/mppi");
  State s = sys.start();
  for (int t = 0; t < sys.horizon; ++t) {
    const MppiStepResult r = planner.step(s, rng, sys.horizon - t);
    out.max_weight_error = std::max(out.max_weight_error, std::abs(r.weights.sum() - 1.0));
    out.episode_cost += sys.cost(s, r.action(0));
    s = sys.step(s, r.action(0));
  }
  out.dp_cost = grid_dp_optimal_cost(sys);

  // Near-zero temperature: the update should follow the cheapest sample.
  MppiConfig cold = cfg;
  cold.lambda = 1e-6;
  MppiPlanner argmin(cold, model, reward);
  s = sys.start();
  for (int t = 0; t < 5; ++t) {
    const MppiStepResult r = argmin.step(s, rng, sys.horizon - t);
    Eigen::Index best = 0;
    r.costs.minCoeff(&best);
    const Matrix& eps = r.perturbations[static_cast<std::size_t>(best)];
    const Matrix expected = r.nominal_before.leftCols(eps.cols()) + eps;
    out.max_argmin_gap = std::max(out.max_argmin_gap,
                                  (r.nominal_updated.leftCols(eps.cols()) - expected).cwiseAbs().maxCoeff());
    s = sys.step(s, r.action(0));
  }
  return out;
}

MppiConfig double_integrator_mppi() {
  MppiConfig cfg;
  cfg.K = 1000;
  cfg.iterations = 10;
  cfg.noise = 1.0;
  cfg.lambda = 0.02;
  return cfg;
}

std::vector<LemmaCheck> run_lemma_suite(std::uint64_t seed) {
  std::vector<LemmaCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };
  auto s = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };

  const double gap = simulation_lemma_max_gap(100, seed);
  add("simulation lemma", gap <= 1e-10, "max |lhs - rhs| = " + s(gap));
  const double slack = trace_telescope_min_slack(100, seed);
  add("trace telescoping", slack >= -1e-9, "min slack = " + s(slack));
  const double excess = information_gain_max_excess(100, seed);
  add("information gain bound", excess <= 1e-9, "max excess = " + s(excess));
  const SandwichTrials sw = sandwich_trials(5, 4, 1.0, 0.05, 20, 100, seed);
  add("covariance sandwich", sw.quad_rate >= 0.95 && sw.ratio_rate >= 0.95,
      "K = " + std::to_string(sw.K) + ", rate = " + s(sw.quad_rate) + ", bonus ratio rate = " + s(sw.ratio_rate));
  const RiskDecay rd = sgd_risk_decay(10, 100, 10000, 0.1, seed);
  add("SGD risk decay", rd.ratio >= 3.0, "risk ratio = " + s(rd.ratio));
  const double tv = gaussian_tv_min_margin(seed, 50);
  add("Gaussian TV bound", tv >= -1e-9, "min margin = " + s(tv));
  const IdentificationTrials id = mle_identification_trials(20, 4, 0.25, 500, seed);
  add("exact MLE identification", id.rate >= 0.95, "rate = " + s(id.rate));
  const OptimismTrials opt = optimism_trials(20, 3, seed);
  add("optimism", opt.rate >= 0.95, "rate = " + s(opt.rate) + ", min margin = " + s(opt.min_margin));
  const double feas = feasibility_trials(20, 500, 4, 5, 0.1, seed);
  add("feasibility of the truth", feas >= 0.85, "rate = " + s(feas));
  const int d0 = eluder_dimension(eluder_singleton_instance(0.1), 10).dimension;
  const int d1 = eluder_dimension(eluder_separated_instance(0.1, 0.3), 10).dimension;
  add("eluder dimension", d0 == 0 && d1 == 1, "singleton = " + std::to_string(d0) + ", separated = " + std::to_string(d1));
  const MppiSanity m = mppi_sanity(double_integrator_mppi(), DoubleIntegrator{}, seed);
  const double rel = std::abs(m.episode_cost - m.dp_cost) / m.dp_cost;
  add("MPPI double integrator", m.max_weight_error <= 1e-12 && m.max_argmin_gap <= 1e-3 && rel <= 0.1,
      "cost " + s(m.episode_cost) + " vs DP " + s(m.dp_cost));
  return out;
}

}  // namespace pcmlp
