#include "pcmlp/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcmlp/errors.hpp"
#include "pcmlp/parallel.hpp"

namespace pcmlp {

Matrix covariance_from_features(std::span<const Vector> features, int d) {
  Matrix cov = Matrix::Zero(d, d);
  if (features.empty()) return cov;
  for (const auto& f : features) {
    if (f.size() != d) throw DimensionError("covariance: feature dimension mismatch");
    cov.selfadjointView<Eigen::Lower>().rankUpdate(f);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  return cov / static_cast<double>(features.size());
}

Matrix estimate_policy_cov(const Policy& policy, const MdpSpec& mdp, const FeatureMap& phi, int K, Rng& rng) {
  if (K < 1) throw PreconditionError("estimate_policy_cov: K must be >= 1");
  const auto samples = d_pi_samples(policy, mdp, K, rng);
  std::vector<Vector> features(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { features[i] = phi(samples[i].state, samples[i].action); });
  return covariance_from_features(features, phi.dim());
}

void PolicyCover::add(Policy policy, Matrix covariance) {
  policies.push_back(std::move(policy));
  covariances.push_back(std::move(covariance));
}

Matrix aggregate(std::span<const Matrix> covariances, double lambda, int d) {
  if (!(lambda > 0)) throw PreconditionError("aggregate: lambda must be positive");
  Matrix total = lambda * Matrix::Identity(d, d);
  for (const auto& c : covariances) {
    if (c.rows() != d || c.cols() != d) throw DimensionError("aggregate: covariance dimension mismatch");
    total += c;
  }
  return total;
}

Matrix aggregate(const PolicyCover& cover, double lambda, int d) { return aggregate(cover.covariances, lambda, d); }

namespace {

double condition_estimate(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (ev.size() == 0) return 0.0;
  const double lo = ev.minCoeff();
  return lo > 0 ? ev.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

Matrix cholesky_lower(const Matrix& m, const char* who) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    const double cond = condition_estimate(m);
    throw NumericError(std::string(who) + ": covariance is not positive definite (condition estimate " +
                           std::to_string(cond) + ")",
                       cond);
  }
  return llt.matrixL();
}

double quad_with_lower(const Matrix& lower, const Vector& x) {
  Vector y = x;
  lower.triangularView<Eigen::Lower>().solveInPlace(y);
  return y.squaredNorm();
}

}  // namespace

BonusSpec::BonusSpec(Matrix sigma_hat, double c, double cap, double lambda, BonusForm form)
    : sigma_hat_(std::move(sigma_hat)), c_(c), cap_(cap), lambda_(lambda), form_(form) {
  if (c_ < 0) throw PreconditionError("BonusSpec: scale must be >= 0");
  if (!(cap_ > 0)) throw PreconditionError("BonusSpec: cap must be positive");
  if (sigma_hat_.rows() != sigma_hat_.cols()) throw DimensionError("BonusSpec: covariance must be square");
  lower_ = cholesky_lower(sigma_hat_, "BonusSpec");
}

double BonusSpec::quadratic_form(const Vector& phi) const {
  if (phi.size() != sigma_hat_.rows()) throw DimensionError("bonus: feature dimension mismatch");
  return quad_with_lower(lower_, phi);
}

double BonusSpec::operator()(const Vector& phi) const {
  const double q = quadratic_form(phi);
  if (form_ == BonusForm::kMainText) return std::min(2.0 * c_ * std::sqrt(q), cap_);
  return 2.0 * std::min(c_ * std::sqrt(0.5 * q), cap_);
}

double bonus(const BonusSpec& spec, const Vector& phi) { return spec(phi); }

SandwichStats bonus_sandwich_check(std::span<const Matrix> true_covs, std::span<const Matrix> empirical_covs,
                                   std::span<const Vector> probes, double c, double cap, double lambda) {
  if (true_covs.size() != empirical_covs.size() || true_covs.empty()) {
    throw PreconditionError("bonus_sandwich_check: need equally many exact and empirical covariances");
  }
  const int d = static_cast<int>(true_covs.front().rows());
  SandwichStats stats;
  stats.min_ratio = stats.min_quad_ratio = std::numeric_limits<double>::infinity();
  stats.max_ratio = stats.max_quad_ratio = -std::numeric_limits<double>::infinity();
  Matrix exact = lambda * Matrix::Identity(d, d);
  Matrix empirical = exact;
  for (std::size_t n = 0; n < true_covs.size(); ++n) {
    exact += true_covs[n];
    empirical += empirical_covs[n];
    const Matrix exact_lower = cholesky_lower(exact, "bonus_sandwich_check");
    const BonusSpec b_hat(empirical, c, cap, lambda);
    for (const auto& x : probes) {
      const double q = quad_with_lower(exact_lower, x);
      const double q_hat = b_hat.quadratic_form(x);
      if (q > 0) {
        const double qr = q_hat / q;
        stats.min_quad_ratio = std::min(stats.min_quad_ratio, qr);
        stats.max_quad_ratio = std::max(stats.max_quad_ratio, qr);
      }
      const double b = std::min(c * std::sqrt(q), cap);
      if (b > 0) {
        const double r = b_hat(x) / b;
        stats.min_ratio = std::min(stats.min_ratio, r);
        stats.max_ratio = std::max(stats.max_ratio, r);
      }
    }
  }
  stats.ratio_within = stats.min_ratio >= 1.0 - 1e-12 && stats.max_ratio <= 4.0 + 1e-12;
  stats.quad_within = stats.min_quad_ratio >= 0.5 && stats.max_quad_ratio <= 2.0;
  return stats;
}

namespace {

double log_det_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericError("log-determinant of a non-positive-definite matrix", condition_estimate(m));
  const Matrix l = llt.matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace

double information_gain(std::span<const Matrix> covariances, double lambda) {
  if (!(lambda > 0)) throw PreconditionError("information_gain: lambda must be positive");
  if (covariances.empty()) return 0.0;
  const int d = static_cast<int>(covariances.front().rows());
  Matrix m = Matrix::Identity(d, d);
  for (const auto& c : covariances) m += c / lambda;
  return log_det_spd(m);
}

TelescopeSides trace_telescope_check(std::span<const Matrix> covariances, double lambda) {
  if (!(lambda > 0)) throw PreconditionError("trace_telescope_check: lambda must be positive");
  TelescopeSides sides;
  if (covariances.empty()) return sides;
  const int d = static_cast<int>(covariances.front().rows());
  Matrix m = lambda * Matrix::Identity(d, d);
  for (std::size_t n = 0; n < covariances.size(); ++n) {
    const Matrix& sigma = covariances[n];
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() > 1.0 + 1e-12) {
      throw PreconditionError("trace_telescope_check: covariance " + std::to_string(n) + " has an eigenvalue above 1");
    }
    Eigen::LLT<Matrix> llt(m);
    sides.rhs += llt.solve(sigma).trace();
    m += sigma;
  }
  sides.lhs = 2.0 * log_det_spd(m) - 2.0 * d * std::log(lambda);
  return sides;
}

OccupancySample mixture_sample(const PolicyCover& cover, const MdpSpec& mdp, Rng& rng) {
  if (cover.empty()) throw PreconditionError("mixture_sample: empty policy cover");
  const int i = rng.uniform_int(static_cast<int>(cover.size()));
  return d_pi_sample(cover.policies[static_cast<std::size_t>(i)], mdp, rng);
}

}  // namespace pcmlp
