#pragma once

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include "pcmlp/features.hpp"
#include "pcmlp/rng.hpp"
#include "pcmlp/types.hpp"

namespace pcmlp {

// Gaussian dynamics s' = W phi(s, a) + sigma z, z ~ N(0, I).
class KnrModel {
 public:
  KnrModel(Matrix weights, double sigma, double frobenius_budget);

  const Matrix& weights() const { return weights_; }
  double sigma() const { return sigma_; }
  double frobenius_budget() const { return budget_; }
  int state_dim() const { return static_cast<int>(weights_.rows()); }
  int feature_dim() const { return static_cast<int>(weights_.cols()); }

  Vector mean(const Vector& phi_sa) const;

 private:
  Matrix weights_;
  double sigma_;
  double budget_;
};

Vector knr_sample(const KnrModel& model, const Vector& phi_sa, Rng& rng);

// Log-density of next_state under N(W phi, sigma^2 I), with the usual 1/2 in the
// exponent. sigma = 0 gives -inf off the mean and +inf on it.
double knr_log_likelihood(const KnrModel& model, const Vector& phi_sa, const Vector& next_state);

// Finite-candidate linear MDP: P(s'|s, a) = <mu(s'), phi(s, a)> with mu taken
// from a shared candidate list. Each candidate is an n_states x d matrix whose
// row s' is mu(s').
class LinearMdpModel {
 public:
  using Candidates = std::vector<Matrix>;

  LinearMdpModel(std::shared_ptr<const Candidates> candidates, std::size_t selected, FeatureMap phi,
                 int n_states, int n_actions);

  // Same candidate list and features, different selected candidate.
  LinearMdpModel with_selected(std::size_t index) const;

  std::size_t selected() const { return selected_; }
  std::size_t candidate_count() const { return candidates_->size(); }
  const Candidates& candidates() const { return *candidates_; }
  const FeatureMap& features() const { return phi_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  // Next-state law under an arbitrary candidate; clipped at 0 and renormalized.
  Vector next_dist(int s, int a, std::size_t candidate) const;

 private:
  std::shared_ptr<const Candidates> candidates_;
  std::size_t selected_;
  FeatureMap phi_;
  int n_states_;
  int n_actions_;
};

Vector linmdp_next_dist(const LinearMdpModel& model, int s, int a);

// Explicit tabular transition table, rows indexed by s * n_actions + a.
class TabularTransition {
 public:
  TabularTransition(int n_states, int n_actions, std::vector<Vector> rows);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  const Vector& row(int s, int a) const { return rows_[static_cast<std::size_t>(s * n_actions_ + a)]; }
  const std::vector<Vector>& rows() const { return rows_; }

 private:
  int n_states_;
  int n_actions_;
  std::vector<Vector> rows_;
};

struct KnrTransition {
  KnrModel model;
  FeatureMap phi;
};

using TransitionModel = std::variant<KnrTransition, LinearMdpModel, TabularTransition>;

State sample_next(const TransitionModel& model, const State& s, const Action& a, Rng& rng);
// True when next_distribution is available (linear MDP or explicit table).
bool is_tabular(const TransitionModel& model);
Vector next_distribution(const TransitionModel& model, int s, int a);
// Sizes of a tabular-evaluable model; throws UnsupportedModel for KNR.
std::pair<int, int> tabular_shape(const TransitionModel& model);

// Draws an index from a probability vector.
int sample_index(const Vector& probs, Rng& rng);

// min{||mu1 - mu2|| / sigma, 1}, an upper bound on TV(N(mu1, s^2 I), N(mu2, s^2 I)).
double gaussian_tv_bound(const Vector& mu1, const Vector& mu2, double sigma);

// F + sigma sqrt(d_s ln(d_s M / delta)): with probability 1 - delta all M
// next states drawn from a KNR with ||W||_F <= F are bounded by this value.
double state_norm_bound(double F, double sigma, int d_s, double M, double delta);

// Euclidean projection of W onto {||W||_F <= radius}.
Matrix project_frobenius(const Matrix& w, double radius);
// Projection onto {||W||_2 <= radius} by clipping singular values.
Matrix project_spectral(const Matrix& w, double radius);

}  // namespace pcmlp
