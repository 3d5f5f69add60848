#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "energy/core_data.hpp"

namespace energy {

enum class DistanceKind { euclidean, truncated, weighted };

std::string_view to_string(DistanceKind kind);

// All distances accumulate squared differences left to right in component
// order, so with full overlap the truncated and weighted distances are
// bit-identical to the Euclidean one.

double euclidean(std::span<const double> u, std::span<const double> v);

/// Euclidean distance over the components observed in both vectors; 0 when
/// the overlap is empty.
double truncated_distance(std::span<const double> x, std::span<const std::uint8_t> rx,
                          std::span<const double> y, std::span<const std::uint8_t> ry);

/// Truncated distance scaled by the overlap fraction (overlap count / d).
double weighted_distance(std::span<const double> x, std::span<const std::uint8_t> rx,
                         std::span<const double> y, std::span<const std::uint8_t> ry);

/// Square or rectangular matrix of non-negative distances, row-major.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  const double* row_ptr(std::size_t i) const { return v_.data() + i * cols_; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

/// Entry (i, j) is the chosen distance between row i of `a` and row j of `b`.
/// The Euclidean kind requires every row involved to be complete.
DistanceMatrix pairwise_matrix(const IncompleteSample& a, const IncompleteSample& b,
                               DistanceKind kind);

/// Symmetric matrix over the rows of one sample. Only the upper triangle is
/// evaluated; the lower triangle is mirrored and the diagonal is zero.
DistanceMatrix pairwise_matrix(const IncompleteSample& s, DistanceKind kind);

} // namespace energy
