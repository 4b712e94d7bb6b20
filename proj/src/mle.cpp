#include "pcmlp/mle.hpp"

#include <cmath>
#include <limits>

#include "pcmlp/errors.hpp"

namespace pcmlp {

double default_step_size(double F, double B, std::size_t M) {
  return F * F / ((F + B) * std::sqrt(static_cast<double>(M)));
}

KnrModel fit_knr_sgd(std::span<const KnrSample> data, const SgdConfig& cfg, double sigma) {
  if (data.empty()) throw PreconditionError("fit_knr_sgd: empty dataset");
  if (!(cfg.F > 0) || !(cfg.B > 0)) throw PreconditionError("fit_knr_sgd: F and B must be positive");
  const double eta = cfg.eta > 0 ? cfg.eta : default_step_size(cfg.F, cfg.B, data.size());
  if (!(eta > 0) || !std::isfinite(eta)) throw PreconditionError("fit_knr_sgd: step size must be positive");
  const auto ds = data.front().next_state.size();
  const auto d = data.front().phi.size();
  Matrix w = Matrix::Zero(ds, d);
  Matrix sum = Matrix::Zero(ds, d);
  for (const auto& sample : data) {
    if (sample.phi.size() != d || sample.next_state.size() != ds) throw DimensionError("fit_knr_sgd: ragged data");
    // The average runs over W_1..W_M, so accumulate before stepping.
    sum += w;
    const Vector residual = w * sample.phi - sample.next_state;
    w.noalias() -= eta * residual * sample.phi.transpose();
    w = cfg.projection == Projection::kFrobenius ? project_frobenius(w, cfg.F) : project_spectral(w, cfg.F);
  }
  Matrix avg = sum / static_cast<double>(data.size());
  // Averages of spectral-ball iterates stay in the spectral ball but may leave
  // the Frobenius ball the model class requires.
  avg = project_frobenius(avg, cfg.F);
  return KnrModel(std::move(avg), sigma, cfg.F);
}

KnrModel fit_knr_least_squares(std::span<const KnrSample> data, double sigma, double F, double ridge) {
  if (data.empty()) throw PreconditionError("fit_knr_least_squares: empty dataset");
  const auto ds = data.front().next_state.size();
  const auto d = data.front().phi.size();
  Matrix gram = Matrix::Identity(d, d) * ridge;
  Matrix cross = Matrix::Zero(ds, d);
  for (const auto& sample : data) {
    gram.noalias() += sample.phi * sample.phi.transpose();
    cross.noalias() += sample.next_state * sample.phi.transpose();
  }
  Eigen::LDLT<Matrix> ldlt(gram);
  Matrix w = ldlt.solve(cross.transpose()).transpose();
  return KnrModel(project_frobenius(w, F), sigma, F);
}

ExactMleResult fit_linmdp_exact(std::span<const TabularSample> data, const LinearMdpModel& model) {
  ExactMleResult result;
  const std::size_t count = model.candidate_count();
  result.log_likelihoods.assign(count, 0.0);
  for (std::size_t c = 0; c < count; ++c) {
    double total = 0.0;
    for (const auto& x : data) {
      const double p = model.next_dist(x.s, x.a, c)(x.next);
      total += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
    result.log_likelihoods[c] = total;
  }
  double best = result.log_likelihoods[0];
  for (std::size_t c = 1; c < count; ++c) {
    if (result.log_likelihoods[c] > best) {
      best = result.log_likelihoods[c];
      result.index = c;
    }
  }
  result.degenerate = std::isinf(best) && best < 0;
  return result;
}

double model_error_at(const TransitionModel& model, const TransitionModel& truth, const State& s, const Action& a,
                      bool squared) {
  if (model.index() != truth.index()) {
    // Linear MDP candidates and explicit tables are comparable through their rows.
    if (!(is_tabular(model) && is_tabular(truth))) throw PreconditionError("measure_model_error: family mismatch");
  }
  if (const auto* knr = std::get_if<KnrTransition>(&model)) {
    const auto& other = std::get<KnrTransition>(truth);
    const Vector phi = knr->phi(s, a);
    const double e = (knr->model.mean(phi) - other.model.mean(phi)).norm();
    return squared ? e * e : e;
  }
  const auto [ns, na] = tabular_shape(model);
  const int si = index_of(s, ns);
  const int ai = index_of(a, na);
  const double l1 = (next_distribution(model, si, ai) - next_distribution(truth, si, ai)).lpNorm<1>();
  return l1 * l1;
}

ValueEstimate measure_model_error(const TransitionModel& model, const TransitionModel& truth,
                                  const OccupancySampler& sampler, int n, Rng& rng, bool squared) {
  if (n < 1) throw PreconditionError("measure_model_error: n must be >= 1");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const OccupancySample x = sampler(rng);
    values.push_back(model_error_at(model, truth, x.state, x.action, squared));
  }
  return summarize_returns(values);
}

double exact_model_error(const TransitionModel& model, const TransitionModel& truth, const Matrix& occupancy) {
  double total = 0.0;
  for (Eigen::Index s = 0; s < occupancy.rows(); ++s) {
    for (Eigen::Index a = 0; a < occupancy.cols(); ++a) {
      if (occupancy(s, a) == 0.0) continue;
      total += occupancy(s, a) * model_error_at(model, truth, encode_index(static_cast<int>(s)),
                                                encode_index(static_cast<int>(a)));
    }
  }
  return total;
}

double knr_squared_risk(const Matrix& w_hat, const Matrix& w_star, const Matrix& feature_cov) {
  const Matrix delta = w_hat - w_star;
  return (delta * feature_cov * delta.transpose()).trace();
}

}  // namespace pcmlp
