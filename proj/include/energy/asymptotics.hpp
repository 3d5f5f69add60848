#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "energy/core_data.hpp"
#include "energy/distributions.hpp"

namespace energy {

/// t -> phi(t) for a law on R^d.
using CharacteristicFunction = std::function<std::complex<double>(std::span<const double>)>;

/// exp(i t'mean - t' cov t / 2). An empty mean is read as zero.
CharacteristicFunction normal_cf(SquareMatrix cov, std::vector<double> mean = {});

/// Empirical characteristic function (1/n) sum_j exp(i t'X_j).
std::complex<double> ecf(const DataMatrix& sample, std::span<const double> t);

struct QuadratureSpec {
  double rel_tol = 1e-9;        // per-panel quadrature
  double abs_tol = 1e-13;
  double tail_rel_tol = 1e-6;   // bound on the neglected oscillating tail
  double initial_cutoff = 64.0;  // first truncation point T
  double max_cutoff = 1e6;
  double panel_width = 1.0;
  int max_depth = 40;
};

/// Integral of |phi_x(t) - phi_y(t)|^2 / (pi t^2) over the real line, for
/// one-dimensional complete samples, by adaptive Gauss-Kronrod quadrature on
/// [0, T] (the integrand is even). The non-oscillating part of the tail
/// beyond T is added in closed form; T doubles until a bound on the
/// oscillating remainder is within tolerance. Throws OracleError when the
/// quadrature does not converge.
double integral_oracle_1d(const DataMatrix& x, const DataMatrix& y,
                          const QuadratureSpec& spec = {});
double integral_oracle_1d(std::span<const double> x, std::span<const double> y,
                          const QuadratureSpec& spec = {});

/// Limiting covariance C(t, s) of the centred process built from
/// cos(t'X) + sin(t'X):
///   Re phi(s-t) + Im phi(s+t) - (Re phi(t) + Im phi(t)) (Re phi(s) + Im phi(s)).
double cov_kernel(const CharacteristicFunction& phi, std::span<const double> s,
                  std::span<const double> t);

struct ProcessCheck {
  double max_deviation = 0.0;
  std::vector<double> empirical;    // G x G, row-major
  std::vector<double> theoretical;  // G x G, row-major
};

/// Simulates Z_{n,1}(t) = n^{-1/2} sum_i [cos(t'X_i) + sin(t'X_i) - Re phi(t)
/// - Im phi(t)] S_i / sqrt(q) on `grid`, with S_i ~ Bernoulli(q) independent
/// of X (q = 1 is complete data), and compares its covariance over
/// `replicates` runs with cov_kernel. Replicate r draws from child_rng(seed,
/// r). Throws PreconditionError if replicates < 100.
ProcessCheck empirical_process_check(const Dgp& dgp, const CharacteristicFunction& phi, double q,
                                     const std::vector<std::vector<double>>& grid, std::size_t n,
                                     std::size_t replicates, std::uint64_t seed,
                                     std::size_t jobs = 1);
/// Same, with phi in closed form; `dgp` must be normal.
ProcessCheck empirical_process_check(const Dgp& dgp, double q,
                                     const std::vector<std::vector<double>>& grid, std::size_t n,
                                     std::size_t replicates, std::uint64_t seed,
                                     std::size_t jobs = 1);

} // namespace energy
