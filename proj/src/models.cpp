#include "pcmlp/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pcmlp/errors.hpp"

namespace pcmlp {

namespace {
constexpr double kBudgetSlack = 1e-9;
constexpr double kNegativeMassTolerance = 1e-6;
constexpr double kRowSumTolerance = 1e-6;
}  // namespace

KnrModel::KnrModel(Matrix weights, double sigma, double frobenius_budget)
    : weights_(std::move(weights)), sigma_(sigma), budget_(frobenius_budget) {
  if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) throw PreconditionError("KnrModel: sigma must be >= 0");
  if (!(budget_ > 0.0)) throw PreconditionError("KnrModel: Frobenius budget must be positive");
  const double norm = weights_.norm();
  if (norm > budget_ * (1.0 + kBudgetSlack)) {
    throw PreconditionError("KnrModel: ||W||_F = " + std::to_string(norm) + " exceeds budget " +
                            std::to_string(budget_));
  }
}

Vector KnrModel::mean(const Vector& phi_sa) const {
  if (phi_sa.size() != weights_.cols()) throw DimensionError("KNR: feature dimension mismatch");
  return weights_ * phi_sa;
}

Vector knr_sample(const KnrModel& model, const Vector& phi_sa, Rng& rng) {
  if (phi_sa.norm() > 1.0 + 1e-9) throw PreconditionError("knr_sample: ||phi|| exceeds 1");
  Vector s = model.mean(phi_sa);
  if (model.sigma() > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) += model.sigma() * rng.normal();
  }
  return s;
}

double knr_log_likelihood(const KnrModel& model, const Vector& phi_sa, const Vector& next_state) {
  if (phi_sa.norm() > 1.0 + 1e-9) throw PreconditionError("knr_log_likelihood: ||phi|| exceeds 1");
  const Vector mu = model.mean(phi_sa);
  if (next_state.size() != mu.size()) throw DimensionError("knr_log_likelihood: state dimension mismatch");
  const double sq = (mu - next_state).squaredNorm();
  const double sigma = model.sigma();
  if (sigma == 0.0) {
    return sq == 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  const double ds = static_cast<double>(mu.size());
  return -0.5 * ds * std::log(2.0 * std::numbers::pi * sigma * sigma) - sq / (2.0 * sigma * sigma);
}

LinearMdpModel::LinearMdpModel(std::shared_ptr<const Candidates> candidates, std::size_t selected,
                               FeatureMap phi, int n_states, int n_actions)
    : candidates_(std::move(candidates)),
      selected_(selected),
      phi_(std::move(phi)),
      n_states_(n_states),
      n_actions_(n_actions) {
  if (!candidates_ || candidates_->empty()) throw PreconditionError("LinearMdpModel: no candidates");
  if (selected_ >= candidates_->size()) throw PreconditionError("LinearMdpModel: selected index out of range");
  const int d = phi_.dim();
  for (std::size_t c = 0; c < candidates_->size(); ++c) {
    const Matrix& mu = (*candidates_)[c];
    if (mu.rows() != n_states_ || mu.cols() != d) {
      throw DimensionError("LinearMdpModel: candidate " + std::to_string(c) + " has wrong shape");
    }
    for (int s = 0; s < n_states_; ++s) {
      for (int a = 0; a < n_actions_; ++a) {
        const Vector p = mu * phi_(encode_index(s), encode_index(a));
        if (p.minCoeff() < -kNegativeMassTolerance || std::abs(p.sum() - 1.0) > kRowSumTolerance) {
          throw PreconditionError("LinearMdpModel: candidate " + std::to_string(c) +
                                  " does not induce a distribution at (s=" + std::to_string(s) +
                                  ", a=" + std::to_string(a) + ")");
        }
      }
    }
    // max over ||nu||_inf <= 1 of ||mu^T nu||, bounded coordinate-wise by the
    // best sign pattern for each feature coordinate.
    const double bound_sq = mu.cwiseAbs().colwise().sum().squaredNorm();
    if (bound_sq > static_cast<double>(d) * (1.0 + 1e-9)) {
      throw PreconditionError("LinearMdpModel: candidate " + std::to_string(c) + " violates the sqrt(d) norm bound");
    }
  }
}

LinearMdpModel LinearMdpModel::with_selected(std::size_t index) const {
  if (index >= candidates_->size()) throw PreconditionError("LinearMdpModel: selected index out of range");
  LinearMdpModel copy = *this;
  copy.selected_ = index;
  return copy;
}

Vector LinearMdpModel::next_dist(int s, int a, std::size_t candidate) const {
  if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_) throw DimensionError("linmdp: (s, a) out of range");
  Vector p = (*candidates_)[candidate] * phi_(encode_index(s), encode_index(a));
  p = p.cwiseMax(0.0);
  return p / p.sum();
}

Vector linmdp_next_dist(const LinearMdpModel& model, int s, int a) {
  return model.next_dist(s, a, model.selected());
}

TabularTransition::TabularTransition(int n_states, int n_actions, std::vector<Vector> rows)
    : n_states_(n_states), n_actions_(n_actions), rows_(std::move(rows)) {
  if (n_states_ < 1 || n_actions_ < 1) throw PreconditionError("TabularTransition: sizes must be positive");
  if (rows_.size() != static_cast<std::size_t>(n_states_ * n_actions_)) {
    throw DimensionError("TabularTransition: expected n_states * n_actions rows");
  }
  for (auto& r : rows_) {
    if (r.size() != n_states_) throw DimensionError("TabularTransition: row length must equal n_states");
    if (r.minCoeff() < -kNegativeMassTolerance || std::abs(r.sum() - 1.0) > kRowSumTolerance) {
      throw PreconditionError("TabularTransition: row is not a distribution");
    }
    r = r.cwiseMax(0.0);
    r /= r.sum();
  }
}

int sample_index(const Vector& probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the final partial sum; take the last positive entry.
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs(i) > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

State sample_next(const TransitionModel& model, const State& s, const Action& a, Rng& rng) {
  return std::visit(
      [&](const auto& m) -> State {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnrTransition>) {
          return knr_sample(m.model, m.phi(s, a), rng);
        } else if constexpr (std::is_same_v<T, LinearMdpModel>) {
          return encode_index(sample_index(linmdp_next_dist(m, index_of(s, m.n_states()), index_of(a, m.n_actions())), rng));
        } else {
          return encode_index(sample_index(m.row(index_of(s, m.n_states()), index_of(a, m.n_actions())), rng));
        }
      },
      model);
}

bool is_tabular(const TransitionModel& model) { return !std::holds_alternative<KnrTransition>(model); }

Vector next_distribution(const TransitionModel& model, int s, int a) {
  if (const auto* lin = std::get_if<LinearMdpModel>(&model)) return linmdp_next_dist(*lin, s, a);
  if (const auto* tab = std::get_if<TabularTransition>(&model)) {
    if (s < 0 || s >= tab->n_states() || a < 0 || a >= tab->n_actions()) throw DimensionError("tabular: (s, a) out of range");
    return tab->row(s, a);
  }
  throw UnsupportedModel("next_distribution: KNR models have no tabular next-state law");
}

std::pair<int, int> tabular_shape(const TransitionModel& model) {
  if (const auto* lin = std::get_if<LinearMdpModel>(&model)) return {lin->n_states(), lin->n_actions()};
  if (const auto* tab = std::get_if<TabularTransition>(&model)) return {tab->n_states(), tab->n_actions()};
  throw UnsupportedModel("tabular_shape: KNR model is not tabular");
}

double gaussian_tv_bound(const Vector& mu1, const Vector& mu2, double sigma) {
  if (!(sigma > 0.0)) throw PreconditionError("gaussian_tv_bound: sigma must be positive");
  if (mu1.size() != mu2.size()) throw DimensionError("gaussian_tv_bound: dimension mismatch");
  return std::min((mu1 - mu2).norm() / sigma, 1.0);
}

double state_norm_bound(double F, double sigma, int d_s, double M, double delta) {
  if (!(F > 0) || sigma < 0 || d_s < 1 || !(M > 0)) throw PreconditionError("state_norm_bound: bad arguments");
  if (!(delta > 0 && delta < 1)) throw PreconditionError("state_norm_bound: delta must lie in (0, 1)");
  const double log_term = std::log(static_cast<double>(d_s) * M / delta);
  return F + sigma * std::sqrt(static_cast<double>(d_s) * std::max(0.0, log_term));
}

Matrix project_frobenius(const Matrix& w, double radius) {
  const double n = w.norm();
  if (n <= radius) return w;
  return w * (radius / n);
}

Matrix project_spectral(const Matrix& w, double radius) {
  Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= radius) return w;
  sv = sv.cwiseMin(radius);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace pcmlp
