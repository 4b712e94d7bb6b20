#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pcmlp/mdp.hpp"
#include "pcmlp/models.hpp"

namespace pcmlp {

struct KnrSample {
  Vector phi;
  Vector next_state;
};

struct TabularSample {
  int s = 0;
  int a = 0;
  int next = 0;
};

enum class Projection { kFrobenius, kSpectral };

struct SgdConfig {
  double F = 1.0;      // projection radius
  double B = 1.0;      // bound on ||s'|| (see state_norm_bound)
  double eta = 0.0;    // <= 0 selects F^2 / ((F + B) sqrt(M))
  Projection projection = Projection::kFrobenius;
};

double default_step_size(double F, double B, std::size_t M);

// One pass of projected SGD on the squared loss, one sample per step, starting
// from W = 0; returns the average of the M iterates W_1..W_M.
KnrModel fit_knr_sgd(std::span<const KnrSample> data, const SgdConfig& cfg, double sigma);

// Ridge-regularized least squares (the Gaussian MLE), projected onto the
// Frobenius ball of radius F.
KnrModel fit_knr_least_squares(std::span<const KnrSample> data, double sigma, double F, double ridge);

struct ExactMleResult {
  std::size_t index = 0;
  bool degenerate = false;               // every candidate scored -inf
  std::vector<double> log_likelihoods;   // one per candidate
};

// argmax over candidates of the total log-likelihood; ties go to the lowest index.
ExactMleResult fit_linmdp_exact(std::span<const TabularSample> data, const LinearMdpModel& model);

using OccupancySampler = std::function<OccupancySample(Rng&)>;

// Monte-Carlo estimate over (s, a) ~ sampler of
//   KNR:        ||W_hat phi - W* phi||_2   (squared when `squared` is set)
//   tabular:    ||P_hat(.|s,a) - P*(.|s,a)||_1^2
// Both models must be of the same family.
ValueEstimate measure_model_error(const TransitionModel& model, const TransitionModel& truth,
                                  const OccupancySampler& sampler, int n, Rng& rng, bool squared = false);

// Pointwise error used by measure_model_error.
double model_error_at(const TransitionModel& model, const TransitionModel& truth, const State& s, const Action& a,
                      bool squared = false);

// E_{(s,a) ~ occupancy} ||P_hat - P*||_1^2 computed exactly.
double exact_model_error(const TransitionModel& model, const TransitionModel& truth, const Matrix& occupancy);

// tr((W_hat - W*) Sigma (W_hat - W*)^T) = E ||(W_hat - W*) phi||^2 for E[phi phi^T] = Sigma.
double knr_squared_risk(const Matrix& w_hat, const Matrix& w_star, const Matrix& feature_cov);

}  // namespace pcmlp
