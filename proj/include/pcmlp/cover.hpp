#pragma once

#include <span>
#include <vector>

#include "pcmlp/features.hpp"
#include "pcmlp/mdp.hpp"

namespace pcmlp {

// Average of phi phi^T over the given feature vectors.
Matrix covariance_from_features(std::span<const Vector> features, int d);

// Sigma_hat_pi = (1/K) sum_i phi(s_i, a_i) phi(s_i, a_i)^T with (s_i, a_i) ~ d^pi.
Matrix estimate_policy_cov(const Policy& policy, const MdpSpec& mdp, const FeatureMap& phi, int K, Rng& rng);

// Ordered policies with the empirical covariance recorded when each joined.
struct PolicyCover {
  std::vector<Policy> policies;
  std::vector<Matrix> covariances;

  std::size_t size() const { return policies.size(); }
  bool empty() const { return policies.empty(); }
  void add(Policy policy, Matrix covariance);
};

// sum_i Sigma_i + lambda I.
Matrix aggregate(std::span<const Matrix> covariances, double lambda, int d);
Matrix aggregate(const PolicyCover& cover, double lambda, int d);

// Main text:  min{2c sqrt(phi^T S^-1 phi), H}
// Lemma:      2 min{c sqrt(phi^T S^-1 phi / 2), H}
enum class BonusForm { kMainText, kLemma };

// Exploration bonus over a fixed regularized aggregate covariance. The
// Cholesky factor is computed once; queries are triangular solves.
class BonusSpec {
 public:
  BonusSpec(Matrix sigma_hat, double c, double cap, double lambda, BonusForm form = BonusForm::kMainText);

  double operator()(const Vector& phi) const;
  // phi^T Sigma_hat^-1 phi.
  double quadratic_form(const Vector& phi) const;

  const Matrix& covariance() const { return sigma_hat_; }
  double scale() const { return c_; }
  double cap() const { return cap_; }
  double lambda() const { return lambda_; }
  BonusForm form() const { return form_; }

 private:
  Matrix sigma_hat_;
  Matrix lower_;  // Cholesky factor L with L L^T = Sigma_hat
  double c_;
  double cap_;
  double lambda_;
  BonusForm form_;
};

double bonus(const BonusSpec& spec, const Vector& phi);

struct SandwichStats {
  double min_ratio = 0.0;         // min over probes and prefixes of b_hat / b
  double max_ratio = 0.0;
  bool ratio_within = false;      // every ratio in [1, 4]
  double min_quad_ratio = 0.0;    // min of x^T Sigma_hat^-1 x / x^T Sigma^-1 x
  double max_quad_ratio = 0.0;
  bool quad_within = false;       // every quadratic ratio in [1/2, 2]
};

// Compares the bonus built from empirical covariances (2c form) against the
// theoretical bonus min{c sqrt(phi^T Sigma_n^-1 phi), H} from exact ones, at
// every prefix n = 1..N of the sequences and every probe.
SandwichStats bonus_sandwich_check(std::span<const Matrix> true_covs, std::span<const Matrix> empirical_covs,
                                   std::span<const Vector> probes, double c, double cap, double lambda);

// ln det(I + (1/lambda) sum_i Sigma_i) for the realized sequence.
double information_gain(std::span<const Matrix> covariances, double lambda);

struct TelescopeSides {
  double lhs = 0.0;  // 2 ln det(M_N) - 2 ln det(lambda I)
  double rhs = 0.0;  // sum_n tr(Sigma_n M_{n-1}^-1)
};

// Throws PreconditionError when some Sigma_n has an eigenvalue above 1. The
// inequality lhs >= rhs needs ln(1 + x) >= x / 2 on [0, 1 / lambda], so it is
// only guaranteed for lambda >= 1 (it fails for small lambda).
TelescopeSides trace_telescope_check(std::span<const Matrix> covariances, double lambda);

// Uniform policy index, then a draw from that policy's occupancy.
OccupancySample mixture_sample(const PolicyCover& cover, const MdpSpec& mdp, Rng& rng);

}  // namespace pcmlp
