#include "energy/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "energy/errors.hpp"

namespace energy {

std::string_view to_string(ImputerKind kind) {
  switch (kind) {
  case ImputerKind::mean: return "mean";
  case ImputerKind::median: return "median";
  case ImputerKind::knn: return "knn";
  }
  return "unknown";
}

ImputerKind imputer_kind_from_string(std::string_view name) {
  if (name == "mean") return ImputerKind::mean;
  if (name == "median") return ImputerKind::median;
  if (name == "knn") return ImputerKind::knn;
  throw ParameterError("unknown imputer '" + std::string(name) + "'");
}

void ImputerSpec::validate() const {
  if (kind == ImputerKind::knn && k == 0) throw ParameterError("knn imputer: k must be >= 1");
}

std::string ImputerSpec::label() const {
  if (kind == ImputerKind::knn) return std::to_string(k) + "NN";
  return std::string(to_string(kind));
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw EmptyInputError("median of empty list");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

std::vector<double> observed_column(const IncompleteSample& s, std::size_t k) {
  std::vector<double> out;
  out.reserve(s.rows());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (s.observed(i, k)) out.push_back(s.value(i, k));
  }
  return out;
}

bool column_has_missing(const IncompleteSample& s, std::size_t k) {
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (!s.observed(i, k)) return true;
  }
  return false;
}

[[noreturn]] void unimputable(std::size_t k) {
  throw UnimputableColumnError("column " + std::to_string(k + 1) + " has no observed values");
}

template <typename Fill>
DataMatrix fill_columns(const IncompleteSample& s, Fill&& column_value) {
  DataMatrix out = s.data();
  for (std::size_t k = 0; k < s.dim(); ++k) {
    if (!column_has_missing(s, k)) continue;
    auto obs = observed_column(s, k);
    if (obs.empty()) unimputable(k);
    const double v = column_value(std::move(obs));
    for (std::size_t i = 0; i < s.rows(); ++i) {
      if (!s.observed(i, k)) out(i, k) = v;
    }
  }
  return out;
}

} // namespace

DataMatrix MeanImputer::impute(const IncompleteSample& sample) const {
  return fill_columns(sample, [](std::vector<double> obs) {
    double acc = 0.0;
    for (double v : obs) acc += v;
    return acc / static_cast<double>(obs.size());
  });
}

DataMatrix MedianImputer::impute(const IncompleteSample& sample) const {
  return fill_columns(sample, [](std::vector<double> obs) { return median_of(std::move(obs)); });
}

KnnImputer::KnnImputer(std::size_t k) : k_(k) {
  if (k_ == 0) throw ParameterError("knn imputer: k must be >= 1");
}

std::vector<std::size_t> knn_neighbors(const IncompleteSample& sample, std::size_t row,
                                       std::size_t target_column, std::size_t k) {
  if (row >= sample.rows() || target_column >= sample.dim()) {
    throw ShapeError("knn_neighbors: index out of range");
  }
  const std::size_t d = sample.dim();
  const auto x = sample.row(row);
  const auto rx = sample.response_row(row);
  std::vector<std::pair<double, std::size_t>> candidates;
  for (std::size_t j = 0; j < sample.rows(); ++j) {
    if (j == row || !sample.observed(j, target_column)) continue;
    const auto y = sample.row(j);
    const auto ry = sample.response_row(j);
    double acc = 0.0;
    std::size_t overlap = 0;
    for (std::size_t c = 0; c < d; ++c) {
      if (rx[c] & ry[c]) {
        const double diff = x[c] - y[c];
        acc += diff * diff;
        ++overlap;
      }
    }
    if (overlap == 0) continue;
    candidates.emplace_back(std::sqrt(acc) / std::sqrt(static_cast<double>(overlap)), j);
  }
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end());
  std::vector<std::size_t> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = candidates[i].second;
  return out;
}

DataMatrix KnnImputer::impute(const IncompleteSample& sample) const {
  DataMatrix out = sample.data();
  std::vector<double> column_median(sample.dim(), 0.0);
  for (std::size_t c = 0; c < sample.dim(); ++c) {
    if (!column_has_missing(sample, c)) continue;
    auto obs = observed_column(sample, c);
    if (obs.empty()) unimputable(c);
    column_median[c] = median_of(std::move(obs));
  }
  std::vector<double> donors;
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    if (sample.is_complete(i)) continue;
    for (std::size_t c = 0; c < sample.dim(); ++c) {
      if (sample.observed(i, c)) continue;
      const auto nb = knn_neighbors(sample, i, c, k_);
      if (nb.empty()) {
        out(i, c) = column_median[c];
        continue;
      }
      donors.clear();
      for (auto j : nb) donors.push_back(sample.value(j, c));
      out(i, c) = median_of(donors);
    }
  }
  return out;
}

std::unique_ptr<Imputer> make_imputer(const ImputerSpec& spec) {
  spec.validate();
  switch (spec.kind) {
  case ImputerKind::mean: return std::make_unique<MeanImputer>();
  case ImputerKind::median: return std::make_unique<MedianImputer>();
  case ImputerKind::knn: return std::make_unique<KnnImputer>(spec.k);
  }
  throw ParameterError("unknown imputer");
}

DataMatrix impute(const IncompleteSample& sample, const ImputerSpec& spec) {
  return make_imputer(spec)->impute(sample);
}

} // namespace energy
