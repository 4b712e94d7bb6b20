#include "pcmlp/pcmlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "pcmlp/errors.hpp"
#include "pcmlp/log.hpp"
#include "pcmlp/parallel.hpp"

namespace pcmlp {

void PcmlpConfig::validate() const {
  if (N < 1 || K < 1 || M < 1) throw PreconditionError("pcmlp: N, K and M must be >= 1");
  if (!(lambda > 0)) throw PreconditionError("pcmlp: lambda must be positive");
  if (bonus_scale < 0) throw PreconditionError("pcmlp: bonus scale must be >= 0");
  if (rollouts_per_policy < 1 || eval_rollouts < 1 || probe_count < 1 || model_error_samples < 1) {
    throw PreconditionError("pcmlp: rollout and probe counts must be >= 1");
  }
  if (model_value_rollouts < 0) throw PreconditionError("pcmlp: model_value_rollouts must be >= 0");
  if (!(delta > 0 && delta < 1)) throw PreconditionError("pcmlp: delta must lie in (0, 1)");
  if (planner == PlannerKind::kTabular && family != ModelFamily::kLinMdp) {
    throw PreconditionError("pcmlp: the tabular planner needs the linear MDP model family");
  }
  if (planner == PlannerKind::kMppi && family != ModelFamily::kKnr) {
    throw PreconditionError("pcmlp: the MPPI planner needs the KNR model family");
  }
}

double schedule_c(ModelFamily family, int H, int d, double F, double sigma, double lambda, int N, double eps_stat) {
  if (H < 1 || N < 1 || !(lambda > 0) || eps_stat < 0) throw PreconditionError("schedule_c: invalid inputs");
  if (family == ModelFamily::kLinMdp) {
    if (d < 1) throw PreconditionError("schedule_c: d must be >= 1");
    return H * std::sqrt(lambda * d + N * eps_stat);
  }
  if (!(sigma > 0)) throw PreconditionError("schedule_c: KNR schedule needs sigma > 0");
  return H / sigma * std::sqrt(4.0 * lambda * F * F + N * eps_stat);
}

TheoreticalSchedule theoretical_linmdp_schedule(double epsilon, double delta, int H, int d, std::size_t n_models) {
  if (!(epsilon > 0 && epsilon < 1) || !(delta > 0 && delta < 0.5)) {
    throw PreconditionError("theoretical schedule: epsilon in (0, 1), delta in (0, 0.5)");
  }
  const double a = std::pow(H, 6) * d * d / (epsilon * epsilon);
  TheoreticalSchedule s;
  s.N = 80.0 * a * std::log(40.0 * a);
  s.M = 2.0 * s.N * std::log(static_cast<double>(n_models) * s.N / delta);
  s.c = H * std::sqrt(d + 1.0);
  s.K = 32.0 * s.N * s.N * std::log(8.0 * s.N * d / delta);
  return s;
}

TheoreticalSchedule theoretical_knr_schedule(double epsilon, double delta, int H, int d, int d_s, double F,
                                             double sigma) {
  if (!(epsilon > 0 && epsilon < 1) || !(delta > 0 && delta < 0.5) || !(sigma > 0)) {
    throw PreconditionError("theoretical schedule: epsilon in (0, 1), delta in (0, 0.5), sigma > 0");
  }
  const double a = std::pow(H, 6) * F * F * d_s * d / (sigma * sigma * epsilon * epsilon);
  TheoreticalSchedule s;
  s.N = 12800.0 * a * std::log(6400.0 * a);
  const double lead = (8.0 * std::pow(F, 4) + 9.0 * sigma * sigma * F * F * d_s * std::log(2.0 * d_s * s.N / delta)) *
                      std::pow(std::log(s.N / delta), 2) * s.N * s.N;
  const double tail = 18.0 * sigma * sigma * F * F * d_s;
  s.M = lead + tail * std::log(lead + tail);
  s.c = 8.0 * H / sigma * std::sqrt(F * F * d_s);
  s.K = 32.0 * s.N * s.N * std::log(8.0 * s.N * d / delta);
  return s;
}

RegretSummary regret_diagnostic(const std::vector<IterationRecord>& records, double v_star, int horizon) {
  RegretSummary out;
  double regret = 0.0;
  double bonus_sum = 0.0;
  for (const auto& r : records) {
    regret += v_star - r.value_true_mean;
    bonus_sum += r.avg_bonus_per_step;
    const double bound = 6.0 * horizon * horizon * bonus_sum + horizon;
    out.cumulative_regret.push_back(regret);
    out.cumulative_bonus.push_back(bonus_sum);
    out.bound.push_back(bound);
    if (regret > bound) out.within_bound = false;
  }
  return out;
}

namespace {

using Bank = std::vector<Trajectory>;

OccupancySample sample_from_bank(const Bank& bank, Rng& rng) {
  const Trajectory& t = bank[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(bank.size())))];
  const int h = rng.uniform_int(static_cast<int>(t.steps.size()));
  const Transition& x = t.steps[static_cast<std::size_t>(h)];
  return {x.state, x.action, h};
}

Transition transition_from_bank(const Bank& bank, Rng& rng) {
  const Trajectory& t = bank[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(bank.size())))];
  return t.steps[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(t.steps.size())))];
}

bool trajectory_hits(const Trajectory& t, const std::function<bool(const State&)>& goal) {
  if (!goal) return false;
  for (const auto& x : t.steps) {
    if (goal(x.state) || goal(x.next_state)) return true;
  }
  return false;
}

class Runner {
 public:
  Runner(const PcmlpConfig& cfg, const EnvInstance& env) : cfg_(cfg), env_(env), tracker_(env.grid) {
    cfg_.validate();
    tabular_ = cfg_.planner == PlannerKind::kTabular;
    if (tabular_ && (!env_.table || !env_.candidates)) {
      throw PreconditionError("pcmlp: the tabular planner needs an env with a candidate list");
    }
    if (!tabular_ && !env_.continuous()) throw PreconditionError("pcmlp: the MPPI planner needs a continuous env");
    if (!tabular_ && cfg_.sampling == SamplingMode::kTruncated && cfg_.K * env_.mdp.horizon > 1000000) {
      log_warning("pcmlp: truncated sampling with an MPPI policy is expensive");
    }
    d_ = env_.bonus_features.dim();
    if (!tabular_) {
      F_ = cfg_.F > 0 ? cfg_.F : (env_.knr_truth ? env_.knr_truth->frobenius_budget() : 100.0);
      sigma_ = cfg_.model_sigma >= 0 ? cfg_.model_sigma : (env_.knr_truth ? env_.knr_truth->sigma() : 0.0);
    }
  }

  PcmlpResult run() {
    PcmlpResult result;
    build_probes();
    const Policy first = env_.uniform_policy();
    result.cover.policies.push_back(first);
    if (trajectory_mode()) {
      Rng rng = Rng::stream(cfg_.seed, "rollout", 0);
      banks_.push_back(rollouts(first, env_.mdp, cfg_.rollouts_per_policy, rng));
      for (const auto& t : banks_.back()) tracker_.add(t);
    } else if (tabular_) {
      add_tabular_coverage(*first.table());
    }

    for (int n = 1; n <= cfg_.N; ++n) {
      try {
        result.cover.covariances.push_back(policy_covariance(result.cover, n - 1));
        result.records.push_back(iterate(result.cover, n));
      } catch (const Error& e) {
        throw Error("iteration " + std::to_string(n) + ": " + e.what());
      }
      const auto& rec = result.records.back();
      if (rec.goal_reached && !result.first_goal_iteration) result.first_goal_iteration = n;
    }
    result.cover.covariances.push_back(policy_covariance(result.cover, cfg_.N));

    result.best_iteration = 1;
    result.best_value = result.records.front().value_true_mean;
    for (std::size_t i = 1; i < result.records.size(); ++i) {
      if (result.records[i].value_true_mean > result.best_value) {
        result.best_value = result.records[i].value_true_mean;
        result.best_iteration = static_cast<int>(i) + 1;
      }
    }
    return result;
  }

 private:
  bool trajectory_mode() const { return !tabular_ && cfg_.sampling == SamplingMode::kTrajectory; }

  void build_probes() {
    Rng rng = Rng::stream(cfg_.seed, "probe");
    const auto samples = d_pi_samples(env_.uniform_policy(), env_.mdp, cfg_.probe_count, rng);
    for (const auto& x : samples) probes_.push_back(env_.bonus_features(x.state, x.action));
    previous_quad_.assign(probes_.size(), std::numeric_limits<double>::infinity());
  }

  std::vector<OccupancySample> policy_samples(const PolicyCover& cover, int index, int count, Rng& rng) {
    if (trajectory_mode()) {
      std::vector<OccupancySample> out;
      out.reserve(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) out.push_back(sample_from_bank(banks_[static_cast<std::size_t>(index)], rng));
      return out;
    }
    return d_pi_samples(cover.policies[static_cast<std::size_t>(index)], env_.mdp, count, rng);
  }

  Matrix policy_covariance(const PolicyCover& cover, int index) {
    Rng rng = Rng::stream(cfg_.seed, "cov", static_cast<std::uint64_t>(index));
    const auto samples = policy_samples(cover, index, cfg_.K, rng);
    std::vector<Vector> features(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) features[i] = env_.bonus_features(samples[i].state, samples[i].action);
    return covariance_from_features(features, d_);
  }

  std::vector<Transition> mixture_transitions(const PolicyCover& cover, int count, Rng& rng) {
    std::vector<Transition> out(static_cast<std::size_t>(count));
    if (trajectory_mode()) {
      for (auto& x : out) x = transition_from_bank(banks_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(banks_.size())))], rng);
      return out;
    }
    const std::uint64_t base = rng.fork_key();
    parallel_for(out.size(), [&](std::size_t i) {
      Rng child = Rng::child(base, i);
      const OccupancySample x = mixture_sample(cover, env_.mdp, child);
      out[i] = {x.state, x.action, env_.mdp.reward(x.state, x.action), step_dynamics(env_.mdp, x.state, x.action, child)};
    });
    return out;
  }

  void add_tabular_coverage(const TabularPolicy& policy) {
    if (visited_.empty()) visited_.assign(static_cast<std::size_t>(env_.table->n_states), 0);
    for (const auto& d : exact_occupancy(policy, *env_.table)) {
      for (Eigen::Index s = 0; s < d.rows(); ++s) {
        if (d.row(s).sum() > 0) visited_[static_cast<std::size_t>(s)] = 1;
      }
    }
  }

  double tabular_coverage() const {
    return static_cast<double>(std::count(visited_.begin(), visited_.end(), 1)) / static_cast<double>(visited_.size());
  }

  double effective_c(double eps_stat, int H) const {
    switch (cfg_.schedule) {
      case CSchedule::kExplicit: return cfg_.bonus_scale;
      case CSchedule::kTheoreticalLinmdp:
        return cfg_.bonus_scale * schedule_c(ModelFamily::kLinMdp, H, d_, F_, sigma_, cfg_.lambda, cfg_.N, eps_stat);
      case CSchedule::kTheoreticalKnr:
        return cfg_.bonus_scale * schedule_c(ModelFamily::kKnr, H, d_, F_, sigma_, cfg_.lambda, cfg_.N, eps_stat);
    }
    return cfg_.bonus_scale;
  }

  void probe_stats(const BonusSpec& bonus, IterationRecord& rec) {
    rec.bonus_min = std::numeric_limits<double>::infinity();
    rec.bonus_max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t i = 0; i < probes_.size(); ++i) {
      const double q = bonus.quadratic_form(probes_[i]);
      // Sigma_hat only grows in the Loewner order, so every quadratic form shrinks.
      if (q > previous_quad_[i] * (1.0 + 1e-9) + 1e-12) {
        throw NumericError("bonus quadratic form increased at probe " + std::to_string(i), q / previous_quad_[i]);
      }
      previous_quad_[i] = q;
      const double b = bonus(probes_[i]);
      rec.bonus_min = std::min(rec.bonus_min, b);
      rec.bonus_max = std::max(rec.bonus_max, b);
      sum += b;
    }
    rec.bonus_mean = sum / static_cast<double>(probes_.size());
  }

  IterationRecord iterate(PolicyCover& cover, int n) {
    IterationRecord rec;
    rec.iter = n;
    const int H = env_.mdp.horizon;
    const Matrix sigma_hat = aggregate(cover, cfg_.lambda, d_);
    rec.info_gain = information_gain(cover.covariances, cfg_.lambda);

    Rng mle_rng = Rng::stream(cfg_.seed, "mle", static_cast<std::uint64_t>(n));
    const auto data = mixture_transitions(cover, cfg_.M, mle_rng);
    if (tabular_) return iterate_tabular(cover, n, sigma_hat, data, rec);
    return iterate_continuous(cover, n, sigma_hat, data, rec, H);
  }

  IterationRecord iterate_tabular(PolicyCover& cover, int n, const Matrix& sigma_hat,
                                  const std::vector<Transition>& data, IterationRecord& rec) {
    const TabularMdp& truth = *env_.table;
    const int nS = truth.n_states;
    const int nA = truth.n_actions;
    const LinearMdpModel& true_model = std::get<LinearMdpModel>(std::get<TransitionModel>(env_.mdp.dynamics));

    std::vector<TabularSample> samples;
    samples.reserve(data.size());
    for (const auto& x : data) samples.push_back({index_of(x.state, nS), index_of(x.action, nA), index_of(x.next_state, nS)});
    const ExactMleResult fit = fit_linmdp_exact(samples, true_model);
    if (fit.degenerate) log_warning("pcmlp: every candidate assigns zero likelihood to the data");
    const LinearMdpModel fitted = true_model.with_selected(fit.index);

    Matrix mixture = Matrix::Zero(nS, nA);
    for (const auto& p : cover.policies) mixture += exact_average_occupancy(*p.table(), truth);
    mixture /= static_cast<double>(cover.size());
    const double err = exact_model_error(TransitionModel(fitted), TransitionModel(true_model), mixture);
    rec.model_error = err;
    rec.eps_stat = cfg_.eps_stat >= 0 ? cfg_.eps_stat : err;
    rec.c = effective_c(rec.eps_stat, truth.horizon);

    const BonusSpec bonus(sigma_hat, rec.c, truth.horizon, cfg_.lambda, cfg_.bonus_form);
    probe_stats(bonus, rec);

    TabularMdp model = truth;
    std::vector<double> bonus_table(static_cast<std::size_t>(nS * nA));
    for (int s = 0; s < nS; ++s) {
      for (int a = 0; a < nA; ++a) {
        const auto k = static_cast<std::size_t>(s * nA + a);
        bonus_table[k] = bonus(env_.bonus_features(encode_index(s), encode_index(a)));
        model.reward[k] = (cfg_.reward_free ? 0.0 : truth.reward[k]) + bonus_table[k];
        model.transition[k] = fitted.next_dist(s, a, fit.index);
      }
    }
    TabularPlan plan = tabular_plan(model);
    rec.plan_value_model = plan.value;
    rec.value_true_mean = exact_value_tabular(plan.policy, truth);
    rec.value_true_se = 0.0;
    const Matrix occ = exact_average_occupancy(plan.policy, truth);
    double avg = 0.0;
    for (int s = 0; s < nS; ++s) {
      for (int a = 0; a < nA; ++a) avg += occ(s, a) * bonus_table[static_cast<std::size_t>(s * nA + a)];
    }
    rec.avg_bonus_per_step = avg;
    add_tabular_coverage(plan.policy);
    rec.coverage = tabular_coverage();
    cover.policies.push_back(Policy::tabular(std::move(plan.policy)));
    (void)n;
    return rec;
  }

  IterationRecord iterate_continuous(PolicyCover& cover, int n, const Matrix& sigma_hat,
                                     const std::vector<Transition>& data, IterationRecord& rec, int H) {
    std::vector<KnrSample> samples(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) samples[i] = {env_.features(data[i].state, data[i].action), data[i].next_state};
    const KnrModel fitted = fit(samples);
    const KnrTransition learned{fitted, env_.features};
    const double lo = env_.action_lo;
    const double hi = env_.action_hi;
    ModelStep model_step = [learned, lo, hi](const State& s, const Action& a) -> State {
      return learned.model.mean(learned.phi(s, a.cwiseMax(lo).cwiseMin(hi)));
    };

    // Held-out model error under the cover mixture.
    Rng err_rng = Rng::stream(cfg_.seed, "model-error", static_cast<std::uint64_t>(n));
    const auto held_out = mixture_transitions(cover, cfg_.model_error_samples, err_rng);
    std::vector<double> errors;
    double sq = 0.0;
    for (const auto& x : held_out) {
      const double e = (model_step(x.state, x.action) - env_.mean_step(x.state, x.action)).norm();
      errors.push_back(e);
      sq += e * e;
    }
    rec.model_error = summarize_returns(errors).mean;
    rec.eps_stat = cfg_.eps_stat >= 0 ? cfg_.eps_stat : sq / static_cast<double>(errors.size());
    rec.c = effective_c(rec.eps_stat, H);

    auto bonus = std::make_shared<const BonusSpec>(sigma_hat, rec.c, H, cfg_.lambda, cfg_.bonus_form);
    probe_stats(*bonus, rec);

    const RewardFn env_reward = env_.mdp.reward;
    const FeatureMap bf = env_.bonus_features;
    const bool reward_free = cfg_.reward_free;
    RewardFn planner_reward = [env_reward, bf, bonus, reward_free, lo, hi](const State& s, const Action& a) {
      const Action u = a.cwiseMax(lo).cwiseMin(hi);
      return (reward_free ? 0.0 : env_reward(s, u)) + (*bonus)(bf(s, u));
    };
    MppiConfig mc = cfg_.mppi;
    mc.action_dim = env_.action_dim;
    mc.action_lo = lo;
    mc.action_hi = hi;
    Policy policy = mppi_policy(mc, model_step, planner_reward, H);

    if (cfg_.model_value_rollouts > 0) {
      MdpSpec model_mdp;
      model_mdp.horizon = H;
      model_mdp.initial_state = env_.mdp.initial_state;
      model_mdp.reward = planner_reward;
      model_mdp.clamp_rewards = false;
      model_mdp.dynamics = BlackBoxDynamics{[model_step](const State& s, const Action& a, Rng&) { return model_step(s, a); },
                                            model_step};
      Rng rng = Rng::stream(cfg_.seed, "model-value", static_cast<std::uint64_t>(n));
      rec.plan_value_model = estimate_value(policy, model_mdp, cfg_.model_value_rollouts, rng).mean;
    }

    Bank trajectories;
    {
      Rng rng = Rng::stream(cfg_.seed, "rollout", static_cast<std::uint64_t>(n));
      const int count = trajectory_mode() ? cfg_.rollouts_per_policy : cfg_.eval_rollouts;
      trajectories = rollouts(policy, env_.mdp, count, rng);
    }
    std::vector<double> returns;
    double bonus_sum = 0.0;
    std::size_t steps = 0;
    for (const auto& t : trajectories) {
      returns.push_back(t.total_reward());
      for (const auto& x : t.steps) {
        bonus_sum += (*bonus)(bf(x.state, x.action.cwiseMax(lo).cwiseMin(hi)));
        ++steps;
      }
      tracker_.add(t);
      rec.goal_reached = rec.goal_reached || trajectory_hits(t, env_.goal);
    }
    const ValueEstimate v = summarize_returns(returns);
    rec.value_true_mean = v.mean;
    rec.value_true_se = v.std_error;
    rec.avg_bonus_per_step = bonus_sum / static_cast<double>(steps);
    rec.coverage = tracker_.fraction();
    if (trajectory_mode()) banks_.push_back(std::move(trajectories));
    cover.policies.push_back(std::move(policy));
    return rec;
  }

  KnrModel fit(const std::vector<KnrSample>& samples) const {
    if (cfg_.fitter == Fitter::kLeastSquares) return fit_knr_least_squares(samples, sigma_, F_, cfg_.ridge);
    SgdConfig sgd;
    sgd.F = F_;
    sgd.B = state_norm_bound(F_, sigma_, env_.state_dim, static_cast<double>(samples.size()), cfg_.delta);
    sgd.projection = cfg_.projection;
    return fit_knr_sgd(samples, sgd, sigma_);
  }

  PcmlpConfig cfg_;
  const EnvInstance& env_;
  bool tabular_ = false;
  int d_ = 0;
  double F_ = 0.0;
  double sigma_ = 0.0;
  std::vector<Vector> probes_;
  std::vector<double> previous_quad_;
  std::vector<Bank> banks_;
  CoverageTracker tracker_;
  std::vector<char> visited_;
};

}  // namespace

PcmlpResult run_pcmlp(const PcmlpConfig& cfg, const EnvInstance& env) { return Runner(cfg, env).run(); }

}  // namespace pcmlp
