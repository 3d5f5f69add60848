#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "energy/core_data.hpp"

namespace energy {

enum class ImputerKind { mean, median, knn };

std::string_view to_string(ImputerKind kind);
ImputerKind imputer_kind_from_string(std::string_view name);

struct ImputerSpec {
  ImputerKind kind = ImputerKind::mean;
  std::size_t k = 6;  // neighbors, knn only

  void validate() const;
  /// "mean", "median", "6NN", ...
  std::string label() const;
  bool operator==(const ImputerSpec&) const = default;
};

/// Single-imputation back-end. Implementations are deterministic and never
/// alter observed cells.
class Imputer {
public:
  virtual ~Imputer() = default;
  virtual DataMatrix impute(const IncompleteSample& sample) const = 0;
};

/// Fills each missing cell with its column mean over observed cells.
class MeanImputer final : public Imputer {
public:
  DataMatrix impute(const IncompleteSample& sample) const override;
};

/// Fills each missing cell with its column median over observed cells.
class MedianImputer final : public Imputer {
public:
  DataMatrix impute(const IncompleteSample& sample) const override;
};

/// Fills cell (i, c) with the median of column c over the k nearest rows
/// (see `knn_neighbors`), falling back to the column median when no
/// candidate exists.
class KnnImputer final : public Imputer {
public:
  explicit KnnImputer(std::size_t k);
  DataMatrix impute(const IncompleteSample& sample) const override;

private:
  std::size_t k_;
};

std::unique_ptr<Imputer> make_imputer(const ImputerSpec& spec);

/// Throws UnimputableColumnError when a column with missing cells has no
/// observed value.
DataMatrix impute(const IncompleteSample& sample, const ImputerSpec& spec);

/// Rows eligible as donors for (row, target_column): rows other than `row`
/// that observe the target column and share at least one observed component
/// with `row`. Distance is the truncated Euclidean distance divided by
/// sqrt(overlap count). Returns at most k indices ordered by distance, ties
/// broken by lower index; empty when no candidate exists.
std::vector<std::size_t> knn_neighbors(const IncompleteSample& sample, std::size_t row,
                                       std::size_t target_column, std::size_t k);

/// Median of a non-empty list (average of the two central values for even
/// sizes).
double median_of(std::vector<double> values);

} // namespace energy
