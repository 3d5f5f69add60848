#include "energy/core_data.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "energy/errors.hpp"

namespace energy {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("data matrix: expected " + std::to_string(rows_ * cols_) +
                     " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("data matrix: non-finite value");
  }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t d = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw ShapeError("data matrix: ragged rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return {rows.size(), d, std::move(values)};
}

ResponseMatrix::ResponseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), flags_(rows * cols, 1) {}

ResponseMatrix::ResponseMatrix(std::size_t rows, std::size_t cols,
                               std::vector<std::uint8_t> flags)
    : rows_(rows), cols_(cols), flags_(std::move(flags)) {
  if (flags_.size() != rows_ * cols_) throw ShapeError("response matrix: size mismatch");
  for (auto f : flags_) {
    if (f > 1) throw ValidationError("response matrix: entries must be 0 or 1");
  }
}

IncompleteSample::IncompleteSample(DataMatrix complete)
    : data_(std::move(complete)), response_(data_.rows(), data_.cols()) {
  derive_flags();
}

IncompleteSample::IncompleteSample(DataMatrix values, ResponseMatrix response)
    : data_(std::move(values)), response_(std::move(response)) {
  if (data_.rows() != response_.rows() || data_.cols() != response_.cols()) {
    throw ShapeError("incomplete sample: data and response shapes differ");
  }
  for (std::size_t i = 0; i < data_.rows(); ++i) {
    for (std::size_t k = 0; k < data_.cols(); ++k) {
      if (!response_.observed(i, k)) data_(i, k) = kMissingValue;
    }
  }
  derive_flags();
}

void IncompleteSample::derive_flags() {
  complete_flags_.assign(rows(), 1);
  complete_count_ = 0;
  for (std::size_t i = 0; i < rows(); ++i) {
    std::uint8_t s = 1;
    for (auto r : response_.row(i)) s = static_cast<std::uint8_t>(s * r);
    complete_flags_[i] = s;
    complete_count_ += s;
  }
}

std::size_t IncompleteSample::observed_count(std::size_t i) const {
  std::size_t c = 0;
  for (auto r : response_.row(i)) c += r;
  return c;
}

IncompleteSample IncompleteSample::select_rows(std::span<const std::size_t> indices) const {
  const std::size_t d = dim();
  std::vector<double> values;
  std::vector<std::uint8_t> flags;
  values.reserve(indices.size() * d);
  flags.reserve(indices.size() * d);
  for (std::size_t idx : indices) {
    if (idx >= rows()) throw ShapeError("select_rows: index out of range");
    auto v = data_.row(idx);
    auto r = response_.row(idx);
    values.insert(values.end(), v.begin(), v.end());
    flags.insert(flags.end(), r.begin(), r.end());
  }
  IncompleteSample out;
  out.data_ = DataMatrix(indices.size(), d, std::move(values));
  out.response_ = ResponseMatrix(indices.size(), d, std::move(flags));
  out.derive_flags();
  return out;
}

const DataMatrix& IncompleteSample::complete_values() const {
  if (!fully_observed()) throw PreconditionError("sample has missing values");
  return data_;
}

IncompleteSample concatenate(const IncompleteSample& a, const IncompleteSample& b) {
  if (a.dim() != b.dim()) throw ShapeError("concatenate: dimension mismatch");
  const std::size_t d = a.dim();
  const std::size_t n = a.rows() + b.rows();
  std::vector<double> values;
  std::vector<std::uint8_t> flags;
  values.reserve(n * d);
  flags.reserve(n * d);
  for (const auto* s : {&a, &b}) {
    auto v = s->data().values();
    values.insert(values.end(), v.begin(), v.end());
    for (std::size_t i = 0; i < s->rows(); ++i) {
      auto r = s->response_row(i);
      flags.insert(flags.end(), r.begin(), r.end());
    }
  }
  return {DataMatrix(n, d, std::move(values)), ResponseMatrix(n, d, std::move(flags))};
}

IncompleteSample build_sample(const std::vector<std::vector<std::optional<double>>>& cells) {
  if (cells.empty()) throw EmptyInputError("build_sample: no rows");
  const std::size_t d = cells.front().size();
  if (d == 0) throw EmptyInputError("build_sample: no columns");
  std::vector<double> values;
  std::vector<std::uint8_t> flags;
  values.reserve(cells.size() * d);
  flags.reserve(cells.size() * d);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].size() != d) {
      throw ShapeError("build_sample: row " + std::to_string(i) + " has " +
                       std::to_string(cells[i].size()) + " entries, expected " +
                       std::to_string(d));
    }
    for (const auto& c : cells[i]) {
      values.push_back(c ? *c : IncompleteSample::kMissingValue);
      flags.push_back(c ? 1 : 0);
    }
  }
  return {DataMatrix(cells.size(), d, std::move(values)),
          ResponseMatrix(cells.size(), d, std::move(flags))};
}

Overlap hadamard_overlap(std::span<const std::uint8_t> r1, std::span<const std::uint8_t> r2) {
  if (r1.size() != r2.size()) throw ShapeError("hadamard_overlap: length mismatch");
  Overlap out;
  out.mask.resize(r1.size());
  for (std::size_t k = 0; k < r1.size(); ++k) {
    out.mask[k] = static_cast<std::uint8_t>(r1[k] * r2[k]);
    out.count += out.mask[k];
  }
  return out;
}

IncompleteSample complete_subsample(const IncompleteSample& s) {
  std::vector<std::size_t> keep;
  keep.reserve(s.complete_count());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (s.is_complete(i)) keep.push_back(i);
  }
  return s.select_rows(keep);
}

} // namespace energy
