#include "pcmlp/matrix_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "pcmlp/errors.hpp"

namespace pcmlp {

namespace {

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string expect_keyword(std::istream& in, const std::string& keyword) {
  std::string word;
  if (!(in >> word) || word != keyword) {
    throw ConfigError("matrix format: expected '" + keyword + "', got '" + word + "'");
  }
  return word;
}

double read_double(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw ConfigError("matrix format: unexpected end of input");
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw ConfigError("matrix format: bad number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("matrix format: bad number '" + tok + "'");
  }
}

Vector row_vector(const Matrix& m) {
  if (m.rows() != 1) throw ConfigError("matrix format: expected a single-row block");
  return m.row(0).transpose();
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format17(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in) {
  long rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw ConfigError("matrix format: bad dimensions header");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) m(i, j) = read_double(in);
  }
  return m;
}

void write_knr(std::ostream& out, const KnrModel& model) {
  out << "knr " << format17(model.sigma()) << ' ' << format17(model.frobenius_budget()) << '\n';
  write_matrix(out, model.weights());
}

KnrModel read_knr(std::istream& in) {
  expect_keyword(in, "knr");
  const double sigma = read_double(in);
  const double budget = read_double(in);
  Matrix w = read_matrix(in);
  return KnrModel(std::move(w), sigma, budget);
}

void write_candidates(std::ostream& out, const LinearMdpModel::Candidates& candidates) {
  out << "candidates " << candidates.size() << '\n';
  for (const auto& mu : candidates) write_matrix(out, mu);
}

LinearMdpModel::Candidates read_candidates(std::istream& in) {
  expect_keyword(in, "candidates");
  long count = -1;
  if (!(in >> count) || count < 0) throw ConfigError("matrix format: bad candidate count");
  LinearMdpModel::Candidates out;
  for (long i = 0; i < count; ++i) out.push_back(read_matrix(in));
  return out;
}

void write_feature_map(std::ostream& out, const FeatureMap& phi) {
  switch (phi.kind()) {
    case FeatureMap::Kind::kRff:
      out << "rff " << format17(phi.rff_bandwidth()) << '\n';
      write_matrix(out, phi.rff_frequencies());
      write_matrix(out, phi.rff_phases().transpose());
      write_matrix(out, phi.rff_input_scale().transpose());
      return;
    case FeatureMap::Kind::kOneHot:
      out << "one_hot " << phi.one_hot_states() << ' ' << phi.one_hot_actions() << '\n';
      return;
    case FeatureMap::Kind::kPolynomial:
      out << "polynomial " << phi.input_dim() << ' ' << phi.poly_degree() << ' ' << format17(phi.radius()) << '\n';
      return;
    case FeatureMap::Kind::kLinear:
      out << "linear " << phi.input_dim() << ' ' << format17(phi.radius()) << '\n';
      return;
    case FeatureMap::Kind::kConcat:
      out << "concat " << phi.parts().size() << '\n';
      for (const auto& p : phi.parts()) write_feature_map(out, p);
      return;
    case FeatureMap::Kind::kCustom:
      break;
  }
  throw UnsupportedModel("custom feature maps cannot be serialized");
}

FeatureMap read_feature_map(std::istream& in) {
  std::string kind;
  if (!(in >> kind)) throw ConfigError("feature map: missing kind");
  if (kind == "rff") {
    const double bw = read_double(in);
    Matrix omega = read_matrix(in);
    Vector phases = row_vector(read_matrix(in));
    Vector scale = row_vector(read_matrix(in));
    return FeatureMap::rff_from_parameters(std::move(omega), std::move(phases), bw, std::move(scale));
  }
  if (kind == "one_hot") {
    int s = 0, a = 0;
    in >> s >> a;
    return FeatureMap::one_hot(s, a);
  }
  if (kind == "polynomial") {
    int n = 0, deg = 0;
    in >> n >> deg;
    return FeatureMap::polynomial(n, deg, read_double(in));
  }
  if (kind == "linear") {
    int n = 0;
    in >> n;
    return FeatureMap::linear(n, read_double(in));
  }
  if (kind == "concat") {
    long k = 0;
    in >> k;
    std::vector<FeatureMap> parts;
    for (long i = 0; i < k; ++i) parts.push_back(read_feature_map(in));
    return FeatureMap::concat(std::move(parts));
  }
  throw ConfigError("feature map: unknown kind '" + kind + "'");
}

}  // namespace pcmlp
