#include "pcmlp/features.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "pcmlp/errors.hpp"
#include "pcmlp/rng.hpp"

namespace pcmlp {

int index_of(const Vector& v, int bound) {
  if (v.size() != 1) throw DimensionError("tabular value must be a length-1 index vector");
  const double x = v(0);
  const int i = static_cast<int>(std::lround(x));
  if (i < 0 || i >= bound || std::abs(x - i) > 1e-9) {
    throw DimensionError("tabular index " + std::to_string(x) + " out of range [0, " +
                         std::to_string(bound) + ")");
  }
  return i;
}

struct FeatureMap::Impl {
  Kind kind;
  int dim = 0;
  int input_dim = 0;
  // rff
  Matrix omega;
  Vector phases;
  Vector input_scale;
  double bandwidth = 1.0;
  // one-hot
  int n_states = 0;
  int n_actions = 0;
  // polynomial
  int degree = 0;
  std::vector<std::vector<int>> exponents;
  double poly_norm = 1.0;
  // polynomial / linear
  double radius = 1.0;
  // custom
  std::function<Vector(const State&, const Action&)> fn;
  // concat
  std::vector<FeatureMap> parts;
};

namespace {

void enumerate_exponents(int n, int degree, std::vector<int>& cur, int pos, int remaining,
                         std::vector<std::vector<int>>& out) {
  if (pos == n) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[pos] = e;
    enumerate_exponents(n, degree, cur, pos + 1, remaining - e, out);
  }
  cur[pos] = 0;
}

Vector monomials(const std::vector<std::vector<int>>& exps, const Vector& z) {
  Vector m(static_cast<Eigen::Index>(exps.size()));
  for (std::size_t k = 0; k < exps.size(); ++k) {
    double v = 1.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      for (int e = 0; e < exps[k][i]; ++e) v *= z(i);
    }
    m(static_cast<Eigen::Index>(k)) = v;
  }
  return m;
}

}  // namespace

FeatureMap FeatureMap::rff(int input_dim, int d, double bandwidth, std::uint64_t seed, Vector input_scale) {
  if (input_dim < 1 || d < 1) throw PreconditionError("rff: dimensions must be positive");
  if (!(bandwidth > 0)) throw PreconditionError("rff: bandwidth must be positive");
  Rng rng(seed);
  Matrix omega(d, input_dim);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < input_dim; ++j) omega(i, j) = rng.normal() / bandwidth;
  }
  Vector phases(d);
  for (int i = 0; i < d; ++i) phases(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (input_scale.size() == 0) input_scale = Vector::Ones(input_dim);
  return rff_from_parameters(std::move(omega), std::move(phases), bandwidth, std::move(input_scale));
}

FeatureMap FeatureMap::rff_from_parameters(Matrix omega, Vector phases, double bandwidth, Vector input_scale) {
  if (omega.rows() != phases.size() || omega.cols() != input_scale.size()) {
    throw DimensionError("rff: inconsistent parameter shapes");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kRff;
  impl->dim = static_cast<int>(omega.rows());
  impl->input_dim = static_cast<int>(omega.cols());
  impl->omega = std::move(omega);
  impl->phases = std::move(phases);
  impl->bandwidth = bandwidth;
  impl->input_scale = std::move(input_scale);
  return FeatureMap(std::move(impl));
}

FeatureMap FeatureMap::one_hot(int n_states, int n_actions) {
  if (n_states < 1 || n_actions < 1) throw PreconditionError("one_hot: sizes must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kOneHot;
  impl->n_states = n_states;
  impl->n_actions = n_actions;
  impl->dim = n_states * n_actions;
  impl->input_dim = impl->dim;
  return FeatureMap(std::move(impl));
}

FeatureMap FeatureMap::polynomial(int input_dim, int degree, double box_radius) {
  if (input_dim < 1 || degree < 0) throw PreconditionError("polynomial: bad dimensions");
  if (!(box_radius > 0)) throw PreconditionError("polynomial: box radius must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kPolynomial;
  impl->input_dim = input_dim;
  impl->degree = degree;
  impl->radius = box_radius;
  std::vector<int> cur(input_dim, 0);
  enumerate_exponents(input_dim, degree, cur, 0, degree, impl->exponents);
  impl->dim = static_cast<int>(impl->exponents.size());
  // Every |monomial| is increasing in each |z_i|, so the corner maximizes the norm.
  impl->poly_norm = monomials(impl->exponents, Vector::Constant(input_dim, box_radius)).norm();
  return FeatureMap(std::move(impl));
}

FeatureMap FeatureMap::linear(int input_dim, double radius) {
  if (input_dim < 1 || !(radius > 0)) throw PreconditionError("linear: bad parameters");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kLinear;
  impl->input_dim = input_dim;
  impl->dim = input_dim;
  impl->radius = radius;
  return FeatureMap(std::move(impl));
}

FeatureMap FeatureMap::custom(int d, std::function<Vector(const State&, const Action&)> fn) {
  if (d < 1) throw PreconditionError("custom: dimension must be positive");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kCustom;
  impl->dim = d;
  impl->fn = std::move(fn);
  return FeatureMap(std::move(impl));
}

FeatureMap FeatureMap::concat(std::vector<FeatureMap> parts) {
  if (parts.empty()) throw PreconditionError("concat: no parts");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kConcat;
  impl->input_dim = parts.front().input_dim();
  for (const auto& p : parts) {
    if (p.input_dim() != impl->input_dim) throw DimensionError("concat: parts disagree on input dimension");
    impl->dim += p.dim();
  }
  impl->parts = std::move(parts);
  return FeatureMap(std::move(impl));
}

FeatureMap::Kind FeatureMap::kind() const { return impl_->kind; }
int FeatureMap::dim() const { return impl_->dim; }
int FeatureMap::input_dim() const { return impl_->input_dim; }

Vector FeatureMap::operator()(const State& s, const Action& a) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::kOneHot:
      return pcmlp::one_hot(index_of(s, m.n_states), index_of(a, m.n_actions), m.n_states, m.n_actions);
    case Kind::kCustom: {
      Vector phi = m.fn(s, a);
      if (phi.size() != m.dim) throw DimensionError("custom feature map returned wrong dimension");
      const double n = phi.norm();
      if (n > 1.0) phi /= n;
      return phi;
    }
    case Kind::kConcat: {
      Vector out(m.dim);
      Eigen::Index off = 0;
      for (const auto& p : m.parts) {
        Vector v = p(s, a);
        out.segment(off, v.size()) = v;
        off += v.size();
      }
      return out / std::sqrt(static_cast<double>(m.parts.size()));
    }
    default:
      return eval_input(pcmlp::concat(s, a));
  }
}

Vector FeatureMap::eval_input(const Vector& z) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::kRff: {
      if (z.size() != m.input_dim) throw DimensionError("rff: input dimension mismatch");
      Vector arg = m.omega * z.cwiseQuotient(m.input_scale) + m.phases;
      return arg.array().cos().matrix() / std::sqrt(static_cast<double>(m.dim));
    }
    case Kind::kPolynomial: {
      if (z.size() != m.input_dim) throw DimensionError("polynomial: input dimension mismatch");
      Vector zc = z.cwiseMax(-m.radius).cwiseMin(m.radius);
      return monomials(m.exponents, zc) / m.poly_norm;
    }
    case Kind::kLinear: {
      if (z.size() != m.input_dim) throw DimensionError("linear: input dimension mismatch");
      return z / std::max(m.radius, z.norm());
    }
    case Kind::kConcat: {
      Vector out(m.dim);
      Eigen::Index off = 0;
      for (const auto& p : m.parts) {
        Vector v = p.eval_input(z);
        out.segment(off, v.size()) = v;
        off += v.size();
      }
      return out / std::sqrt(static_cast<double>(m.parts.size()));
    }
    default:
      throw UnsupportedModel("feature map kind does not accept a raw input vector");
  }
}

const Matrix& FeatureMap::rff_frequencies() const { return impl_->omega; }
const Vector& FeatureMap::rff_phases() const { return impl_->phases; }
const Vector& FeatureMap::rff_input_scale() const { return impl_->input_scale; }
double FeatureMap::rff_bandwidth() const { return impl_->bandwidth; }
int FeatureMap::one_hot_states() const { return impl_->n_states; }
int FeatureMap::one_hot_actions() const { return impl_->n_actions; }
int FeatureMap::poly_degree() const { return impl_->degree; }
double FeatureMap::radius() const { return impl_->radius; }
const std::vector<FeatureMap>& FeatureMap::parts() const { return impl_->parts; }

Vector one_hot(int s_index, int a_index, int n_states, int n_actions) {
  if (s_index < 0 || s_index >= n_states || a_index < 0 || a_index >= n_actions) {
    throw DimensionError("one_hot: index out of range");
  }
  Vector v = Vector::Zero(n_states * n_actions);
  v(s_index * n_actions + a_index) = 1.0;
  return v;
}

}  // namespace pcmlp
