#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "energy/errors.hpp"
#include "energy/statistics.hpp"
#include "test_helpers.hpp"

using namespace energy;
using std::nullopt;

namespace {

// Average of h_W over all (i, i', j, j'), which expands to the V-statistic.
double brute_force_weighted(const IncompleteSample& x, const IncompleteSample& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t i2 = 0; i2 < x.rows(); ++i2)
      for (std::size_t j = 0; j < y.rows(); ++j)
        for (std::size_t j2 = 0; j2 < y.rows(); ++j2)
          sum += h_w_kernel(case_of(x, i), case_of(x, i2), case_of(y, j), case_of(y, j2));
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(y.rows());
  return sum / (n * n * m * m);
}

IncompleteSample shuffled(const IncompleteSample& s, Rng& rng) {
  std::vector<std::size_t> idx(s.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return s.select_rows(idx);
}

} // namespace

TEST_CASE("classic statistic") {
  Rng rng = child_rng(31, 0);
  const auto x = testutil::normal_matrix(rng, 12, 3);
  CHECK(std::abs(energy_statistic(x, x).raw) <= 1e-12);

  const auto one = build_sample({{0.0}});
  const auto two = build_sample({{2.0}});
  CHECK(energy_statistic(one, two).raw == 4.0);
  CHECK(energy_statistic(one, two).scaled == 2.0);

  const auto y = testutil::normal_matrix(rng, 7, 3);
  CHECK(energy_statistic(x, y).raw == energy_statistic(y, x).raw);
  CHECK(energy_statistic(x, y).n == 12);
  CHECK(energy_statistic(x, y).m == 7);

  CHECK_THROWS_AS(energy_statistic(build_sample({{nullopt}, {1.0}}), two), PreconditionError);
  CHECK_THROWS_AS(energy_statistic(DataMatrix(0, 1), DataMatrix(1, 1)), EmptyInputError);
}

TEST_CASE("complete-case statistic") {
  Rng rng = child_rng(31, 1);
  const IncompleteSample x(testutil::normal_matrix(rng, 9, 2));
  const IncompleteSample y(testutil::normal_matrix(rng, 5, 2));
  CHECK(cc_statistic(x, y).raw == energy_statistic(x, y).raw);

  const auto a = build_sample({{0.0}, {nullopt}, {nullopt}});
  const auto b = build_sample({{nullopt}, {2.0}});
  const auto v = cc_statistic(a, b);
  CHECK(v.raw == 4.0);
  CHECK(v.n == 3);
  CHECK(v.m == 2);
  CHECK(*v.n_hat == 1);
  CHECK(*v.m_hat == 1);
  CHECK(v.scaled == 2.0);

  CHECK_THROWS_AS(cc_statistic(build_sample({{nullopt}}), b), NoCompleteCasesError);
  CHECK_THROWS_AS(cc_statistic(b, build_sample({{nullopt}})), NoCompleteCasesError);
}

TEST_CASE("weighted statistic examples") {
  Rng rng = child_rng(31, 2);
  const IncompleteSample x(testutil::normal_matrix(rng, 8, 3));
  const IncompleteSample y(testutil::normal_matrix(rng, 6, 3));
  CHECK(weighted_statistic(x, y).raw == energy_statistic(x, y).raw);

  const auto a = build_sample({{1.0, 2.0, nullopt}});
  const auto b = build_sample({{4.0, nullopt, 8.0}});
  CHECK(weighted_statistic(a, b).raw == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(weighted_statistic(a, build_sample({{1.0}})), ShapeError);
}

TEST_CASE("statistics are symmetric, permutation invariant and nonnegative") {
  Rng rng = child_rng(31, 3);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t d = 1 + rep % 4;
    const auto x = testutil::random_sample(rng, 2 + rep % 9, d, 0.2);
    const auto y = testutil::random_sample(rng, 1 + rep % 6, d, 0.2);
    const double t = weighted_statistic(x, y).raw;
    CHECK(t == weighted_statistic(y, x).raw);
    CHECK(t == weighted_statistic(shuffled(x, rng), shuffled(y, rng)).raw);
    CHECK(t == doctest::Approx(brute_force_weighted(x, y)).epsilon(1e-12));

    const auto cx = complete_subsample(x);
    const auto cy = complete_subsample(y);
    if (cx.rows() > 0 && cy.rows() > 0) {
      const double c = energy_statistic(cx, cy).raw;
      CHECK(c >= -1e-12);
      CHECK(c == energy_statistic(cy, cx).raw);
      CHECK(c == energy_statistic(shuffled(cx, rng), shuffled(cy, rng)).raw);
      CHECK(c == cc_statistic(x, y).raw);
    }
  }
}

TEST_CASE("h_W kernel") {
  const auto p = build_sample({{0.0}, {2.0}});
  const auto z = case_of(p, 0);
  const auto two = case_of(p, 1);
  CHECK(h_w_kernel(z, z, two, two) == 4.0);
  CHECK(h_w_kernel(z, z, z, z) == 0.0);

  Rng rng = child_rng(31, 4);
  const auto s = testutil::random_sample(rng, 4, 3, 0.3);
  const auto a = case_of(s, 0), b = case_of(s, 1), c = case_of(s, 2), d = case_of(s, 3);
  CHECK(h_w_kernel(a, b, c, d) == doctest::Approx(h_w_kernel(b, a, d, c)).epsilon(1e-15));
}

TEST_CASE("scaling factor") {
  CHECK(scaling_factor(100, 50) == doctest::Approx(100.0 * 50.0 / 150.0));
  CHECK(scaling_factor(1, 1) == 0.5);
}

TEST_CASE("null mean identity") {
  const CaseSampler normal = [](Rng& rng, std::size_t rows) {
    return IncompleteSample(testutil::normal_matrix(rng, rows, 3));
  };
  SUBCASE("classic") {
    const auto c = null_mean_identity_check(normal, 10, 10, 20000, 7, StatisticVariant::classic);
    CHECK(std::abs(c.mc_mean - c.eta_hat) <= 3.0 * c.se);
  }
  SUBCASE("weighted with MCAR masking") {
    const CaseSampler masked = [](Rng& rng, std::size_t rows) {
      return testutil::random_sample(rng, rows, 3, 0.2);
    };
    const auto c = null_mean_identity_check(masked, 10, 6, 20000, 8, StatisticVariant::weighted);
    CHECK(std::abs(c.mc_mean - c.eta_hat) <= 3.0 * c.se);
  }
  SUBCASE("point mass") {
    const CaseSampler point = [](Rng&, std::size_t rows) {
      return IncompleteSample(DataMatrix(rows, 2));
    };
    const auto c = null_mean_identity_check(point, 5, 5, 100, 1, StatisticVariant::weighted, 1000);
    CHECK(c.mc_mean == 0.0);
    CHECK(c.eta_hat == 0.0);
  }
  CHECK_THROWS_AS(null_mean_identity_check(normal, 5, 5, 1, 1), PreconditionError);
}
