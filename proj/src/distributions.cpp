#include "energy/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <regex>

#include "energy/errors.hpp"

namespace energy {

SquareMatrix SquareMatrix::identity(std::size_t n) {
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

SquareMatrix SquareMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  SquareMatrix out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw ShapeError("square matrix: ragged or non-square");
    for (std::size_t j = 0; j < rows.size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

SquareMatrix SquareMatrix::operator*(double s) const {
  SquareMatrix out = *this;
  for (auto& v : out.v_) v *= s;
  return out;
}

SquareMatrix SquareMatrix::multiply_transpose() const {
  SquareMatrix out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_; ++k) acc += (*this)(i, k) * (*this)(j, k);
      out(i, j) = acc;
    }
  }
  return out;
}

SquareMatrix cholesky(const SquareMatrix& cov) {
  const std::size_t n = cov.size();
  if (n == 0) throw FactorizationError("cholesky: empty matrix");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double a = cov(i, j);
      const double b = cov(j, i);
      if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) {
        throw FactorizationError("cholesky: matrix is not symmetric");
      }
    }
  }
  SquareMatrix l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = cov(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw FactorizationError("cholesky: matrix is not positive definite");
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = cov(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / l(j, j);
    }
  }
  return l;
}

void Dgp::validate() const {
  if (mean.empty()) throw ParameterError("dgp: empty mean");
  if (covariance.size() != mean.size()) throw ShapeError("dgp: mean/covariance size mismatch");
  if (kind == DgpKind::multivariate_t && !(df > 0.0)) throw ParameterError("dgp: df must be > 0");
}

Dgp normal_dgp(std::vector<double> mean, SquareMatrix covariance, std::string label) {
  Dgp d{DgpKind::multivariate_normal, std::move(mean), std::move(covariance), 0.0,
        std::move(label)};
  d.validate();
  return d;
}

Dgp t_dgp(double df, std::vector<double> mean, SquareMatrix scale, std::string label) {
  Dgp d{DgpKind::multivariate_t, std::move(mean), std::move(scale), df, std::move(label)};
  d.validate();
  return d;
}

DgpSampler::DgpSampler(Dgp dgp) : dgp_(std::move(dgp)) {
  dgp_.validate();
  factor_ = cholesky(dgp_.covariance);
}

DataMatrix DgpSampler::sample(std::size_t n, Rng& rng) const {
  if (n == 0) throw ParameterError("sample: n must be >= 1");
  const std::size_t d = dgp_.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(dgp_.kind == DgpKind::multivariate_t ? dgp_.df : 1.0);
  std::vector<double> values(n * d);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : z) v = normal(rng);
    double scale = 1.0;
    if (dgp_.kind == DgpKind::multivariate_t) scale = 1.0 / std::sqrt(chi2(rng) / dgp_.df);
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k <= r; ++k) acc += factor_(r, k) * z[k];
      values[i * d + r] = dgp_.mean[r] + scale * acc;
    }
  }
  return {n, d, std::move(values)};
}

DataMatrix sample(const Dgp& dgp, std::size_t n, Rng& rng) { return DgpSampler(dgp).sample(n, rng); }

namespace presets {

namespace {
SquareMatrix equicorrelated(std::size_t n, double rho) {
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = i == j ? 1.0 : rho;
  }
  return out;
}
} // namespace

SquareMatrix c1() { return SquareMatrix::identity(3) * 0.5; }
SquareMatrix c2() { return equicorrelated(3, 0.5); }
SquareMatrix c3() { return SquareMatrix::identity(10) * 0.5; }
SquareMatrix c4() { return equicorrelated(10, 0.5); }
std::vector<double> m1() { return std::vector<double>(3, 0.5); }
std::vector<double> m2() { return std::vector<double>(10, 0.5); }

std::optional<SquareMatrix> covariance(const std::string& name, std::size_t dim) {
  if (name == "I") return SquareMatrix::identity(dim);
  if (name == "C1" && dim == 3) return c1();
  if (name == "C2" && dim == 3) return c2();
  if (name == "C3" && dim == 10) return c3();
  if (name == "C4" && dim == 10) return c4();
  return std::nullopt;
}

std::optional<std::vector<double>> mean(const std::string& name, std::size_t dim) {
  if (name == "0") return std::vector<double>(dim, 0.0);
  if (name == "m1" && dim == 3) return m1();
  if (name == "m2" && dim == 10) return m2();
  return std::nullopt;
}

std::optional<Dgp> by_name(const std::string& name, std::size_t dim) {
  static const std::regex pattern(R"(^\s*(N|t(\d+(?:\.\d+)?))\(\s*(\w+)\s*,\s*(\w+)\s*\)\s*$)");
  std::smatch match;
  if (!std::regex_match(name, match, pattern)) return std::nullopt;
  auto mu = mean(match[3].str(), dim);
  auto cov = covariance(match[4].str(), dim);
  if (!mu || !cov) return std::nullopt;
  if (match[1].str() == "N") return normal_dgp(std::move(*mu), std::move(*cov), name);
  return t_dgp(std::stod(match[2].str()), std::move(*mu), std::move(*cov), name);
}

} // namespace presets

} // namespace energy
