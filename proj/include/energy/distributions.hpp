#pragma once

#include <optional>
#include <string>
#include <vector>

#include "energy/core_data.hpp"
#include "energy/rng.hpp"

namespace energy {

/// Dense symmetric-use square matrix, row-major.
class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), v_(n * n, 0.0) {}
  static SquareMatrix identity(std::size_t n);
  static SquareMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }

  SquareMatrix operator*(double s) const;
  SquareMatrix multiply_transpose() const;  // A * A^T
  bool operator==(const SquareMatrix&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<double> v_;
};

/// Lower-triangular L with L L^T = cov. Throws FactorizationError if `cov`
/// is not symmetric positive definite.
SquareMatrix cholesky(const SquareMatrix& cov);

enum class DgpKind { multivariate_normal, multivariate_t };

/// A data-generating process: multivariate normal, or multivariate t built
/// as a normal scale mixture `mean + L z / sqrt(w / df)` with w ~ chi2(df).
struct Dgp {
  DgpKind kind = DgpKind::multivariate_normal;
  std::vector<double> mean;
  SquareMatrix covariance;  // scale matrix for the t family
  double df = 0.0;
  std::string label;

  std::size_t dim() const noexcept { return mean.size(); }
  void validate() const;
};

Dgp normal_dgp(std::vector<double> mean, SquareMatrix covariance, std::string label = {});
Dgp t_dgp(double df, std::vector<double> mean, SquareMatrix scale, std::string label = {});

/// Holds the Cholesky factor so repeated draws do not refactorize.
class DgpSampler {
public:
  explicit DgpSampler(Dgp dgp);
  const Dgp& dgp() const noexcept { return dgp_; }
  DataMatrix sample(std::size_t n, Rng& rng) const;

private:
  Dgp dgp_;
  SquareMatrix factor_;
};

/// n IID rows from `dgp`.
DataMatrix sample(const Dgp& dgp, std::size_t n, Rng& rng);

namespace presets {

/// 0.5 * I_3
SquareMatrix c1();
/// 3x3 equicorrelated, unit diagonal, 0.5 off-diagonal
SquareMatrix c2();
/// 0.5 * I_10
SquareMatrix c3();
/// 10x10 equicorrelated, unit diagonal, 0.5 off-diagonal
SquareMatrix c4();
std::vector<double> m1();
std::vector<double> m2();

/// Covariance alias: "I" (identity of size `dim`), "C1".."C4".
std::optional<SquareMatrix> covariance(const std::string& name, std::size_t dim);
/// Mean alias: "0" (zero vector of size `dim`), "m1", "m2".
std::optional<std::vector<double>> mean(const std::string& name, std::size_t dim);

/// Parse names like "N(0,I)", "N(m1,C1)", "t5(0,I)" at dimension `dim`.
std::optional<Dgp> by_name(const std::string& name, std::size_t dim);

} // namespace presets

} // namespace energy
