#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "energy/distance.hpp"
#include "energy/errors.hpp"
#include "energy/imputation.hpp"
#include "test_helpers.hpp"

using namespace energy;
using std::nullopt;

TEST_CASE("imputer names") {
  CHECK(imputer_kind_from_string("median") == ImputerKind::median);
  CHECK(imputer_kind_from_string("knn") == ImputerKind::knn);
  CHECK_THROWS_AS(imputer_kind_from_string("missforest"), ParameterError);
  CHECK(ImputerSpec{ImputerKind::knn, 6}.label() == "6NN");
  CHECK(ImputerSpec{ImputerKind::mean, 6}.label() == "mean");
  CHECK_THROWS_AS((ImputerSpec{ImputerKind::knn, 0}.validate()), ParameterError);
}

TEST_CASE("mean and median fill") {
  const auto a = build_sample({{1.0}, {3.0}, {nullopt}});
  CHECK(impute(a, {ImputerKind::mean})(2, 0) == 2.0);
  const auto b = build_sample({{1.0}, {2.0}, {100.0}, {nullopt}});
  CHECK(impute(b, {ImputerKind::median})(3, 0) == 2.0);
  CHECK(median_of({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median_of({5.0}) == 5.0);
}

TEST_CASE("complete input passes through") {
  Rng rng = child_rng(51, 0);
  const IncompleteSample s(testutil::normal_matrix(rng, 10, 3));
  for (auto kind : {ImputerKind::mean, ImputerKind::median, ImputerKind::knn})
    CHECK(impute(s, {kind, 3}) == s.complete_values());
}

TEST_CASE("observed cells are preserved") {
  Rng rng = child_rng(51, 1);
  for (int rep = 0; rep < 30; ++rep) {
    auto s = testutil::random_sample(rng, 12, 3, 0.25);
    bool ok = true;
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t seen = 0;
      for (std::size_t i = 0; i < s.rows(); ++i) seen += s.observed(i, k);
      ok = ok && seen > 0;
    }
    if (!ok) continue;
    for (auto kind : {ImputerKind::mean, ImputerKind::median, ImputerKind::knn}) {
      const auto out = impute(s, {kind, 4});
      for (std::size_t i = 0; i < s.rows(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
          if (s.observed(i, k)) CHECK(out(i, k) == s.value(i, k));
          CHECK(std::isfinite(out(i, k)));
        }
      }
    }
  }
}

TEST_CASE("fully missing column is unimputable") {
  const auto s = build_sample({{1.0, nullopt}, {2.0, nullopt}});
  for (auto kind : {ImputerKind::mean, ImputerKind::median, ImputerKind::knn})
    CHECK_THROWS_AS(impute(s, {kind, 2}), UnimputableColumnError);
}

TEST_CASE("knn neighbor order") {
  // Query row 0 is missing column 2.
  const auto s = build_sample({
      {0.0, 0.0, nullopt},
      {0.0, 0.0, 10.0},    // distance 0
      {3.0, 4.0, 20.0},    // sqrt(25/2)
      {1.0, nullopt, 30.0},  // 1 / sqrt(1) = 1
      {nullopt, 2.0, 40.0},  // 2
      {5.0, 5.0, nullopt},   // no target value, never a donor
  });
  CHECK(knn_neighbors(s, 0, 2, 10) == std::vector<std::size_t>{1, 3, 4, 2});
  CHECK(knn_neighbors(s, 0, 2, 2) == std::vector<std::size_t>{1, 3});

  // Brute-force reference over random samples.
  Rng rng = child_rng(51, 2);
  for (int rep = 0; rep < 40; ++rep) {
    const auto r = testutil::random_sample(rng, 15, 3, 0.3);
    const std::size_t row = rep % 15, col = rep % 3;
    std::vector<std::pair<double, std::size_t>> ref;
    for (std::size_t j = 0; j < r.rows(); ++j) {
      if (j == row || !r.observed(j, col)) continue;
      const auto o = hadamard_overlap(r.response_row(row), r.response_row(j));
      if (o.count == 0) continue;
      const double dist = truncated_distance(r.row(row), r.response_row(row), r.row(j),
                                             r.response_row(j)) /
                          std::sqrt(static_cast<double>(o.count));
      ref.emplace_back(dist, j);
    }
    std::sort(ref.begin(), ref.end());
    std::vector<std::size_t> expect;
    for (std::size_t q = 0; q < std::min<std::size_t>(5, ref.size()); ++q) expect.push_back(ref[q].second);
    CHECK(knn_neighbors(r, row, col, 5) == expect);
  }
}

TEST_CASE("knn fills with the neighbor median") {
  const auto s = build_sample({
      {0.0, nullopt},
      {0.1, 1.0},
      {0.2, 3.0},
      {5.0, 100.0},
  });
  const auto out = impute(s, {ImputerKind::knn, 2});
  CHECK(out(0, 1) == 2.0);
  // Local: a far-away cluster does not pull the fill.
  CHECK(impute(s, {ImputerKind::mean})(0, 1) > 30.0);
}
