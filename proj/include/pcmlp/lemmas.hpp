#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcmlp/mdp.hpp"
#include "pcmlp/odpc.hpp"
#include "pcmlp/planners.hpp"

namespace pcmlp {

// ---- Random instances -------------------------------------------------------

TabularMdp random_tabular_mdp(int n_states, int n_actions, int horizon, Rng& rng);
TabularPolicy random_policy(int horizon, int n_states, int n_actions, Rng& rng, bool deterministic = false);
// Average of k outer products of random vectors with norm <= 1.
Matrix random_feature_covariance(int d, int k, Rng& rng);

// ---- Property trials --------------------------------------------------------

// Largest |LHS - RHS| of the simulation lemma over random instances with
// |S| <= 5, |A| <= 3, H <= 4.
double simulation_lemma_max_gap(int instances, std::uint64_t seed);

// Smallest lhs - rhs of the trace-telescoping inequality over random
// sequences with d <= 8, N <= 20.
double trace_telescope_min_slack(int trials, std::uint64_t seed);

// Largest information_gain - d ln(1 + N / lambda) over random sequences.
double information_gain_max_excess(int trials, std::uint64_t seed);

struct SandwichTrials {
  int K = 0;                  // samples per policy
  double quad_rate = 0.0;     // fraction of seeds with every x^T S_hat^-1 x / x^T S^-1 x in [1/2, 2]
  double ratio_rate = 0.0;    // fraction of seeds with every b_hat / b in [1, 4]
  double worst_low = 0.0;     // extreme quadratic ratios seen
  double worst_high = 0.0;
};

// Tabular MDP with 3 states, 3 actions and random features in R^d; N random
// policies with exact and sampled covariances; K from the concentration lemma.
SandwichTrials sandwich_trials(int N, int d, double lambda, double delta, int seeds, int probes, std::uint64_t seed);
int concentration_sample_size(int N, int d, double lambda, double delta);

struct RiskDecay {
  double risk_small = 0.0;  // mean E ||(W_hat - W*) phi||^2 at the small sample size
  double risk_large = 0.0;
  double ratio = 0.0;       // risk_small / risk_large
};

// Projected SGD on a d = 4, d_s = 2 KNR with phi = g / ||g||, g ~ N(0, I).
RiskDecay sgd_risk_decay(int seeds, int m_small, int m_large, double sigma, std::uint64_t seed);

struct IdentificationTrials {
  double rate = 0.0;          // fraction of seeds where the MLE is the truth
  double min_pairwise_tv = 0.0;
};

IdentificationTrials mle_identification_trials(int seeds, int n_candidates, double tv_gap, int M, std::uint64_t seed);

struct OptimismTrials {
  double rate = 0.0;          // fraction of seeds with plan value >= V* at every iteration
  double min_margin = 0.0;    // smallest plan value - V*
  double regret_bound_rate = 0.0;
};

OptimismTrials optimism_trials(int seeds, int iterations, std::uint64_t seed);

// Fraction of seeds in which the truth stays inside every confidence region.
double feasibility_trials(int seeds, int M, int n_models, int N, double delta, std::uint64_t seed);

// Hand-built eluder instances.
EluderInstance eluder_singleton_instance(double epsilon);
// Two models that differ (TV gap `gap`) only in a state reached by policy 0.
EluderInstance eluder_separated_instance(double epsilon, double gap);

// Gaussian TV bound minus the 1-D quadrature TV; negative would be a violation.
double gaussian_tv_min_margin(std::uint64_t seed, int cases);
double gaussian_tv_quadrature(double mu1, double mu2, double sigma);

// ---- MPPI on a double integrator -----------------------------------------------

struct DoubleIntegrator {
  double dt = 0.1;
  double q_x = 1.0;
  double q_v = 0.1;
  double r_u = 0.01;
  int horizon = 30;
  double x0 = 1.0;
  double v0 = 0.0;

  State start() const;
  State step(const State& s, double u) const;
  double cost(const State& s, double u) const;
};

double riccati_optimal_cost(const DoubleIntegrator& sys);

struct GridSpecDp {
  double x_lim = 1.5;
  double v_lim = 3.0;
  int nx = 121;
  int nv = 121;
  double u_lim = 8.0;
  int nu = 81;
};

// Backward induction on a state grid with bilinear interpolation.
double grid_dp_optimal_cost(const DoubleIntegrator& sys, const GridSpecDp& grid = {});

struct MppiSanity {
  double max_weight_error = 0.0;  // |sum w - 1| over every step
  double max_argmin_gap = 0.0;    // low-temperature update vs the best sample
  double episode_cost = 0.0;
  double dp_cost = 0.0;
};

MppiSanity mppi_sanity(const MppiConfig& cfg, const DoubleIntegrator& sys, std::uint64_t seed);

// Settings for the double integrator: controls of size ~5 need more noise and
// more update rounds than the defaults tuned for unit-scale tasks.
MppiConfig double_integrator_mppi();

// ---- Suite --------------------------------------------------------------------

struct LemmaCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<LemmaCheck> run_lemma_suite(std::uint64_t seed);

}  // namespace pcmlp
