#include "pcmlp/odpc.hpp"

#include <cmath>
#include <string>

#include "pcmlp/cover.hpp"
#include "pcmlp/errors.hpp"
#include "pcmlp/log.hpp"
#include "pcmlp/mle.hpp"
#include "pcmlp/parallel.hpp"

namespace pcmlp {

double feasibility_radius(std::size_t n_models, int N, double delta, int M) {
  if (n_models < 1 || N < 1 || M < 1 || !(delta > 0 && delta < 1)) {
    throw PreconditionError("feasibility_radius: invalid arguments");
  }
  const double l = std::log(2.0 * static_cast<double>(n_models) * N / delta);
  return 6.0 * std::sqrt(l / M) + 2.0 * l / M;
}

ConfidenceRegion confidence_region(const LinearMdpModel& model, std::size_t center,
                                   std::span<const std::pair<int, int>> held_out, double radius) {
  if (held_out.empty()) throw PreconditionError("confidence_region: empty held-out data");
  ConfidenceRegion region;
  region.center = center;
  region.radius = radius;
  const std::size_t n = model.candidate_count();
  region.statistics.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double total = 0.0;
    for (const auto& [s, a] : held_out) {
      const double l1 = (model.next_dist(s, a, center) - model.next_dist(s, a, k)).lpNorm<1>();
      total += l1 * l1;
    }
    region.statistics[k] = total / static_cast<double>(held_out.size());
    if (region.statistics[k] <= radius) region.members.push_back(k);
  }
  if (region.members.empty()) {
    region.empty = true;
    region.members.push_back(center);
  }
  return region;
}

OdpcResult run_odpc(const OdpcConfig& cfg, const EnvInstance& env, std::span<const TabularPolicy> policies) {
  if (!env.table || !env.candidates) throw PreconditionError("run_odpc: needs a tabular env with a candidate list");
  if (cfg.N < 1 || cfg.M < 1) throw PreconditionError("run_odpc: N and M must be >= 1");
  const TabularMdp& truth = *env.table;
  const int nS = truth.n_states;
  const int nA = truth.n_actions;
  const auto& true_model = std::get<LinearMdpModel>(std::get<TransitionModel>(env.mdp.dynamics));
  const std::size_t n_models = true_model.candidate_count();
  const double radius = cfg.radius >= 0 ? cfg.radius : feasibility_radius(n_models, cfg.N, cfg.delta, cfg.M);

  std::vector<TabularMdp> models;
  for (std::size_t k = 0; k < n_models; ++k) {
    TabularMdp m = truth;
    for (int s = 0; s < nS; ++s) {
      for (int a = 0; a < nA; ++a) m.transition[static_cast<std::size_t>(s * nA + a)] = true_model.next_dist(s, a, k);
    }
    models.push_back(std::move(m));
  }

  OdpcResult result;
  result.v_star = tabular_plan(truth).value;
  result.cover.push_back(TabularPolicy::uniform(truth.horizon, nS, nA));

  for (int n = 1; n <= cfg.N; ++n) {
    std::vector<Policy> wrapped;
    for (const auto& p : result.cover) wrapped.push_back(Policy::tabular(p));
    PolicyCover cover;
    cover.policies = wrapped;

    auto draw = [&](const char* name) {
      Rng rng = Rng::stream(cfg.seed, name, static_cast<std::uint64_t>(n));
      const std::uint64_t base = rng.fork_key();
      std::vector<TabularSample> out(static_cast<std::size_t>(cfg.M));
      parallel_for(out.size(), [&](std::size_t i) {
        Rng child = Rng::child(base, i);
        const OccupancySample x = mixture_sample(cover, env.mdp, child);
        const State next = step_dynamics(env.mdp, x.state, x.action, child);
        out[i] = {index_of(x.state, nS), index_of(x.action, nA), index_of(next, nS)};
      });
      return out;
    };
    const auto d1 = draw("odpc/fit");
    const auto d2 = draw("odpc/region");

    OdpcRecord rec;
    rec.iter = n;
    const ExactMleResult fit = fit_linmdp_exact(d1, true_model);
    rec.mle_index = fit.index;
    std::vector<std::pair<int, int>> held_out;
    for (const auto& x : d2) held_out.emplace_back(x.s, x.a);
    rec.region = confidence_region(true_model, fit.index, held_out, radius);
    if (rec.region.empty) log_info("odpc iteration " + std::to_string(n) + ": empty confidence region, using the MLE");
    for (const std::size_t m : rec.region.members) rec.truth_in_region = rec.truth_in_region || m == env.truth_index;
    result.truth_always_feasible = result.truth_always_feasible && rec.truth_in_region;

    Matrix mixture = Matrix::Zero(nS, nA);
    for (const auto& p : result.cover) mixture += exact_average_occupancy(p, truth);
    mixture /= static_cast<double>(result.cover.size());
    rec.model_error = exact_model_error(TransitionModel(true_model.with_selected(fit.index)),
                                        TransitionModel(true_model), mixture);

    OptimisticPlan plan = optimistic_plan(models, rec.region.members, policies);
    rec.planned_model = plan.model;
    rec.optimistic_value = plan.value;
    rec.value_true = exact_value_tabular(plan.policy, truth);
    if (rec.truth_in_region && policies.empty() && plan.value < result.v_star - 1e-10) {
      throw NumericError("odpc: optimistic value below V* with the truth in the region", plan.value - result.v_star);
    }
    result.cover.push_back(std::move(plan.policy));
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace pcmlp
