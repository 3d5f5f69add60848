#include <doctest.h>

#include <cmath>
#include <numbers>

#include "energy/asymptotics.hpp"
#include "energy/errors.hpp"
#include "energy/statistics.hpp"
#include "test_helpers.hpp"

using namespace energy;
using V = std::vector<double>;

namespace {

// E[f(X)] for X ~ N(mu, sigma^2), Simpson's rule on mu +- 12 sigma.
template <class F>
double normal_expectation(double mu, double sigma, F f) {
  const int steps = 6000;
  const double lo = -12.0, h = 24.0 / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double z = lo + i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f(mu + sigma * z) * std::exp(-0.5 * z * z);
  }
  return sum * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace

TEST_CASE("empirical characteristic function") {
  const auto x = DataMatrix::from_rows({{0.0}, {std::numbers::pi}});
  CHECK(std::abs(ecf(x, V{1.0})) <= 1e-15);
  CHECK(ecf(x, V{0.0}) == std::complex<double>(1.0, 0.0));

  const auto one = DataMatrix::from_rows({{0.3, -1.2}});
  for (double a : {-2.0, 0.5, 7.0}) {
    const V t{a, 0.25 * a};
    const auto v = ecf(one, t);
    CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-14));
    const double arg = a * 0.3 - 0.25 * a * 1.2;
    CHECK(v.real() == doctest::Approx(std::cos(arg)).epsilon(1e-14));
    CHECK(v.imag() == doctest::Approx(std::sin(arg)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(ecf(one, V{1.0}), ShapeError);
}

TEST_CASE("normal characteristic function") {
  const auto phi = normal_cf(SquareMatrix::identity(1) * 2.0, {0.5});
  const auto v = phi(V{1.0});
  CHECK(std::abs(v) == doctest::Approx(std::exp(-1.0)));
  CHECK(std::arg(v) == doctest::Approx(0.5));
  CHECK(normal_cf(SquareMatrix::identity(3))(V{0, 0, 0}) == std::complex<double>(1.0, 0.0));
}

TEST_CASE("integral oracle") {
  const V a{0.0}, b{2.0};
  CHECK(integral_oracle_1d(a, b) == doctest::Approx(4.0).epsilon(1e-6));
  const V same{0.3, -1.0, 2.5};
  CHECK(std::abs(integral_oracle_1d(same, same)) <= 1e-10);

  Rng rng = child_rng(71, 0);
  std::uniform_int_distribution<std::size_t> size(1, 20);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = testutil::normal_matrix(rng, size(rng), 1);
    const auto y = testutil::normal_matrix(rng, size(rng), 1, 1.5);
    const double direct = energy_statistic(x, y).raw;
    CHECK(integral_oracle_1d(x, y) == doctest::Approx(direct).epsilon(1e-3));
  }
  CHECK_THROWS_AS(integral_oracle_1d(DataMatrix(2, 2), DataMatrix(2, 2)), ShapeError);
  CHECK_THROWS_AS(integral_oracle_1d(V{}, b), EmptyInputError);

  QuadratureSpec tight;
  tight.max_cutoff = 1.0;
  tight.initial_cutoff = 1.0;
  CHECK_THROWS_AS(integral_oracle_1d(V{0.0}, V{0.001}, tight), OracleError);
}

TEST_CASE("covariance kernel") {
  const auto phi = normal_cf(SquareMatrix::identity(1));
  CHECK(cov_kernel(phi, V{0.0}, V{0.0}) == 0.0);
  for (double t : {0.3, 1.0, 2.2}) {
    CHECK(cov_kernel(phi, V{t}, V{t}) == doctest::Approx(1.0 - std::exp(-t * t)).epsilon(1e-14));
    CHECK(cov_kernel(phi, V{-t}, V{t}) ==
          doctest::Approx(std::exp(-2.0 * t * t) - std::exp(-t * t)).epsilon(1e-14));
  }

  // Asymmetric law: compare with a direct integral of the covariance.
  const double mu = 0.7, sigma = std::sqrt(1.3);
  const auto shifted = normal_cf(SquareMatrix::identity(1) * 1.3, {mu});
  for (auto [s, t] : {std::pair{0.5, 1.0}, std::pair{-0.4, 2.0}, std::pair{1.5, 1.5}}) {
    const auto g = [](double u, double x) { return std::cos(u * x) + std::sin(u * x); };
    const double es = normal_expectation(mu, sigma, [&](double x) { return g(s, x); });
    const double et = normal_expectation(mu, sigma, [&](double x) { return g(t, x); });
    const double est = normal_expectation(mu, sigma, [&](double x) { return g(s, x) * g(t, x); });
    CHECK(cov_kernel(shifted, V{s}, V{t}) == doctest::Approx(est - es * et).epsilon(1e-9));
    CHECK(cov_kernel(shifted, V{s}, V{t}) == doctest::Approx(cov_kernel(shifted, V{t}, V{s})));
  }
}

TEST_CASE("empirical process covariance") {
  const Dgp dgp = normal_dgp({0.0}, SquareMatrix::identity(1));
  const std::vector<V> grid{{0.5}, {1.0}, {2.0}};
  for (double q : {1.0, 0.5}) {
    const auto check = empirical_process_check(dgp, q, grid, 500, 5000, 73);
    INFO("q = ", q, " deviation ", check.max_deviation);
    CHECK(check.max_deviation <= 0.05);
    CHECK(check.empirical.size() == 9);
  }
  const auto zero = empirical_process_check(dgp, 1.0, {{0.0}}, 50, 200, 1);
  CHECK(std::abs(zero.empirical[0]) <= 1e-20);
  CHECK(zero.theoretical[0] == 0.0);

  CHECK_THROWS_AS(empirical_process_check(dgp, 1.0, grid, 50, 99, 1), PreconditionError);
  CHECK_THROWS_AS(empirical_process_check(dgp, 0.0, grid, 50, 200, 1), ParameterError);
}
