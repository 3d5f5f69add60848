#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace energy {

/// Dense row-major matrix of finite reals (rows = cases, columns = variables).
class DataMatrix {
public:
  DataMatrix() = default;
  DataMatrix(std::size_t rows, std::size_t cols);
  /// Throws ShapeError if `values.size() != rows * cols` and
  /// ValidationError if any value is not finite.
  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double operator()(std::size_t i, std::size_t k) const { return values_[i * cols_ + k]; }
  double& operator()(std::size_t i, std::size_t k) { return values_[i * cols_ + k]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> values() const noexcept { return values_; }

  bool operator==(const DataMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Binary observedness flags, same shape as the paired DataMatrix.
class ResponseMatrix {
public:
  ResponseMatrix() = default;
  /// All-observed matrix of the given shape.
  ResponseMatrix(std::size_t rows, std::size_t cols);
  /// Throws ShapeError on size mismatch and ValidationError on entries
  /// outside {0,1}.
  ResponseMatrix(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> flags);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  bool observed(std::size_t i, std::size_t k) const { return flags_[i * cols_ + k] != 0; }
  void set(std::size_t i, std::size_t k, bool observed) {
    flags_[i * cols_ + k] = observed ? 1 : 0;
  }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {flags_.data() + i * cols_, cols_};
  }

  bool operator==(const ResponseMatrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> flags_;
};

/// A case-by-variable sample with per-cell observedness.
///
/// The response matrix is authoritative: a cell with indicator 0 is missing
/// and its stored value (always 0.0) must never be read for arithmetic.
/// Per-row completeness flags and the complete-case count are derived at
/// construction. Immutable once built.
class IncompleteSample {
public:
  /// Placeholder stored at unobserved positions.
  static constexpr double kMissingValue = 0.0;

  IncompleteSample() = default;
  /// Fully observed sample.
  explicit IncompleteSample(DataMatrix complete);
  /// Values at unobserved positions are discarded; observed values must be
  /// finite. Shapes must match exactly.
  IncompleteSample(DataMatrix values, ResponseMatrix response);

  std::size_t rows() const noexcept { return data_.rows(); }
  std::size_t dim() const noexcept { return data_.cols(); }

  const DataMatrix& data() const noexcept { return data_; }
  const ResponseMatrix& response() const noexcept { return response_; }

  bool observed(std::size_t i, std::size_t k) const { return response_.observed(i, k); }
  double value(std::size_t i, std::size_t k) const { return data_(i, k); }
  std::span<const double> row(std::size_t i) const { return data_.row(i); }
  std::span<const std::uint8_t> response_row(std::size_t i) const { return response_.row(i); }

  bool is_complete(std::size_t i) const { return complete_flags_[i] != 0; }
  std::span<const std::uint8_t> complete_flags() const noexcept { return complete_flags_; }
  std::size_t complete_count() const noexcept { return complete_count_; }
  bool fully_observed() const noexcept { return complete_count_ == rows(); }
  /// Number of observed cells in row i.
  std::size_t observed_count(std::size_t i) const;

  /// New sample made of the given rows, in the given order (repeats allowed).
  IncompleteSample select_rows(std::span<const std::size_t> indices) const;

  /// The value matrix of a fully observed sample; throws PreconditionError
  /// otherwise.
  const DataMatrix& complete_values() const;

  bool operator==(const IncompleteSample&) const = default;

private:
  void derive_flags();

  DataMatrix data_;
  ResponseMatrix response_;
  std::vector<std::uint8_t> complete_flags_;
  std::size_t complete_count_ = 0;
};

/// Rows of `a` followed by rows of `b`; dimensions must match.
IncompleteSample concatenate(const IncompleteSample& a, const IncompleteSample& b);

/// Build a sample from cells where `std::nullopt` marks a missing value.
/// Throws ShapeError on ragged input and EmptyInputError on zero rows or
/// zero columns.
IncompleteSample build_sample(const std::vector<std::vector<std::optional<double>>>& cells);

struct Overlap {
  std::vector<std::uint8_t> mask;
  std::size_t count = 0;
};

/// Componentwise product of two response vectors and its number of ones.
Overlap hadamard_overlap(std::span<const std::uint8_t> r1, std::span<const std::uint8_t> r2);

/// Rows with every component observed, in their original order.
IncompleteSample complete_subsample(const IncompleteSample& s);

} // namespace energy
