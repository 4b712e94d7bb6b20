#include <algorithm>
#include <cmath>
#include <string>

#include "pcmlp/errors.hpp"
#include "pcmlp/parallel.hpp"
#include "pcmlp/planners.hpp"

namespace pcmlp {

Matrix MppiConfig::covariance() const {
  if (sigma.size() > 0) return sigma;
  return noise * Matrix::Identity(action_dim, action_dim);
}

void MppiConfig::validate() const {
  if (K < 1 || T < 1) throw PreconditionError("MPPI: K and T must be >= 1");
  if (iterations < 1) throw PreconditionError("MPPI: iterations must be >= 1");
  if (!(lambda > 0)) throw PreconditionError("MPPI: temperature must be positive");
  if (action_dim < 1) throw PreconditionError("MPPI: action_dim must be >= 1");
  if (!(action_lo <= action_hi)) throw PreconditionError("MPPI: empty action box");
  const Matrix cov = covariance();
  if (cov.rows() != action_dim || cov.cols() != action_dim) throw DimensionError("MPPI: noise covariance shape");
}

MppiPlanner::MppiPlanner(MppiConfig cfg, ModelStep model, RewardFn reward)
    : cfg_(std::move(cfg)), model_(std::move(model)), reward_(std::move(reward)) {
  cfg_.validate();
  const Matrix cov = cfg_.covariance();
  sigma_llt_.compute(cov);
  if (sigma_llt_.info() != Eigen::Success) throw PreconditionError("MPPI: noise covariance is not positive definite");
  sigma_lower_ = sigma_llt_.matrixL();
  reset();
}

void MppiPlanner::reset() { nominal_ = Matrix::Zero(cfg_.action_dim, cfg_.T); }

void MppiPlanner::set_nominal(Matrix nominal) {
  if (nominal.rows() != cfg_.action_dim || nominal.cols() != cfg_.T) throw DimensionError("MPPI: nominal shape");
  nominal_ = std::move(nominal);
}

MppiStepResult MppiPlanner::step(const State& s0, Rng& rng, int steps_remaining) {
  const int T = (cfg_.clip_to_episode && steps_remaining > 0) ? std::min(cfg_.T, steps_remaining) : cfg_.T;
  const int K = cfg_.K;
  const int m = cfg_.action_dim;

  MppiStepResult out;
  for (int round = 0; round < cfg_.iterations; ++round) {
    out.nominal_before = nominal_;
    out.costs = Vector::Zero(K);
    out.perturbations.assign(static_cast<std::size_t>(K), Matrix());

    // Control-cost term lambda a^T Sigma^-1 eps uses Sigma^-1 a.
    Matrix sigma_inv_a(m, T);
    for (int t = 0; t < T; ++t) sigma_inv_a.col(t) = sigma_llt_.solve(nominal_.col(t));

    const std::uint64_t base = rng.fork_key();
    parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) {
      // Sample k's noise depends only on (base, k) and is drawn in time order,
      // so the first t columns do not depend on K or T.
      Rng noise = Rng::child(base, k);
      Matrix eps(m, T);
      for (int t = 0; t < T; ++t) {
        Vector z(m);
        for (int i = 0; i < m; ++i) z(i) = noise.normal();
        eps.col(t) = sigma_lower_ * z;
      }
      double cost = 0.0;
      State s = s0;
      for (int t = 0; t < T; ++t) {
        const Action v = (nominal_.col(t) + eps.col(t)).cwiseMax(cfg_.action_lo).cwiseMin(cfg_.action_hi);
        cost += -reward_(s, v) + cfg_.lambda * sigma_inv_a.col(t).dot(eps.col(t));
        s = model_(s, v);
        if (!s.allFinite() || !std::isfinite(cost)) {
          throw RolloutError("MPPI: model rollout of sample " + std::to_string(k) + " became non-finite", t);
        }
      }
      out.costs(static_cast<Eigen::Index>(k)) = cost;
      out.perturbations[k] = std::move(eps);
    });

    const double beta = out.costs.minCoeff();
    out.weights = (-(out.costs.array() - beta) / cfg_.lambda).exp().matrix();
    const double eta = out.weights.sum();
    out.weights /= eta;

    for (int k = 0; k < K; ++k) {
      nominal_.leftCols(T) += out.weights(k) * out.perturbations[static_cast<std::size_t>(k)];
    }
  }
  out.nominal_updated = nominal_;
  out.action = nominal_.col(0).cwiseMax(cfg_.action_lo).cwiseMin(cfg_.action_hi);

  for (int t = 0; t + 1 < cfg_.T; ++t) nominal_.col(t) = nominal_.col(t + 1);
  nominal_.col(cfg_.T - 1).setZero();
  return out;
}

MppiStepResult mppi_step(MppiPlanner& planner, const State& s, Rng& rng, int steps_remaining) {
  return planner.step(s, rng, steps_remaining);
}

Policy mppi_policy(const MppiConfig& cfg, ModelStep model, RewardFn reward, int horizon) {
  cfg.validate();
  auto factory = [cfg, model = std::move(model), reward = std::move(reward), horizon]() -> Policy::Controller {
    auto planner = std::make_shared<MppiPlanner>(cfg, model, reward);
    return [planner, horizon](const State& s, int step, Rng& rng) {
      return planner->step(s, rng, horizon - step).action;
    };
  };
  return Policy("mppi", std::move(factory));
}

ModelStep mean_model(const TransitionModel& model) {
  if (const auto* knr = std::get_if<KnrTransition>(&model)) {
    const KnrTransition m = *knr;
    return [m](const State& s, const Action& a) -> State { return m.model.mean(m.phi(s, a)); };
  }
  throw UnsupportedModel("mean_model: only KNR models have a noise-free prediction");
}

ModelStep mean_model(const BlackBoxDynamics& dynamics) {
  if (!dynamics.mean) throw UnsupportedModel("mean_model: black-box dynamics without a mean function");
  return dynamics.mean;
}

}  // namespace pcmlp
