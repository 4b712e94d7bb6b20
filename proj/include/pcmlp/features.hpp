#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pcmlp/types.hpp"

namespace pcmlp {

// phi: S x A -> R^d with ||phi(s, a)||_2 <= 1 for every input.
//
// Continuous maps (rff, polynomial, linear) act on z = concat(s, a). The
// tabular one-hot map reads s and a as indices.
class FeatureMap {
 public:
  enum class Kind { kRff, kOneHot, kPolynomial, kLinear, kCustom, kConcat };

  // Random Fourier features for the RBF kernel exp(-||x - y||^2 / (2 bw^2)).
  // phi(z) = (1/sqrt(d)) cos(Omega (z ./ input_scale) + b), i.e. the usual
  // sqrt(2/d) scaling times 1/sqrt(2), so 2 phi(x).phi(y) estimates the kernel.
  static FeatureMap rff(int input_dim, int d, double bandwidth, std::uint64_t seed,
                        Vector input_scale = Vector());
  static FeatureMap one_hot(int n_states, int n_actions);
  // All monomials of z up to `degree` (constant included), with z clipped to
  // [-box_radius, box_radius]^n and scaled by the maximum norm over that box.
  static FeatureMap polynomial(int input_dim, int degree, double box_radius);
  // z / max(radius, ||z||): exactly linear inside the ball of the given radius.
  static FeatureMap linear(int input_dim, double radius);
  // The caller guarantees ||fn(s, a)|| <= 1; evaluation rescales violations.
  static FeatureMap custom(int d, std::function<Vector(const State&, const Action&)> fn);
  // Stacked maps scaled by 1/sqrt(k).
  static FeatureMap concat(std::vector<FeatureMap> parts);

  Kind kind() const;
  int dim() const;
  // Input dimension for continuous maps; n_states * n_actions for one-hot.
  int input_dim() const;

  Vector operator()(const State& s, const Action& a) const;
  Vector eval_input(const Vector& z) const;

  // Parameter access for serialization and tests.
  const Matrix& rff_frequencies() const;
  const Vector& rff_phases() const;
  const Vector& rff_input_scale() const;
  double rff_bandwidth() const;
  int one_hot_states() const;
  int one_hot_actions() const;
  int poly_degree() const;
  double radius() const;
  const std::vector<FeatureMap>& parts() const;

  // Rebuilds an RFF map from stored parameters.
  static FeatureMap rff_from_parameters(Matrix omega, Vector phases, double bandwidth, Vector input_scale);

  struct Impl;

 private:
  explicit FeatureMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// The one-hot encoding of a state-action pair, index s * n_actions + a.
Vector one_hot(int s_index, int a_index, int n_states, int n_actions);

}  // namespace pcmlp
