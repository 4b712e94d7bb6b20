#pragma once

#include <Eigen/Dense>

namespace pcmlp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Continuous states and actions are real vectors. Tabular states and actions
// are stored as a length-1 vector holding the index; use encode_index /
// index_of to convert.
using State = Eigen::VectorXd;
using Action = Eigen::VectorXd;

inline Vector encode_index(int i) { return Vector::Constant(1, static_cast<double>(i)); }
int index_of(const Vector& v, int bound);

inline Vector concat(const Vector& a, const Vector& b) {
  Vector z(a.size() + b.size());
  z << a, b;
  return z;
}

}  // namespace pcmlp
