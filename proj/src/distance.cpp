#include "energy/distance.hpp"

#include <cmath>

#include "energy/errors.hpp"

namespace energy {

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
  case DistanceKind::euclidean: return "euclidean";
  case DistanceKind::truncated: return "truncated";
  case DistanceKind::weighted: return "weighted";
  }
  return "unknown";
}

double euclidean(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ShapeError("euclidean: length mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double diff = u[k] - v[k];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

namespace {

struct Truncated {
  double distance;
  std::size_t overlap;
};

inline Truncated truncated_unchecked(const double* x, const std::uint8_t* rx, const double* y,
                                     const std::uint8_t* ry, std::size_t d) {
  double acc = 0.0;
  std::size_t overlap = 0;
  for (std::size_t k = 0; k < d; ++k) {
    if (rx[k] & ry[k]) {
      const double diff = x[k] - y[k];
      acc += diff * diff;
      ++overlap;
    }
  }
  return {std::sqrt(acc), overlap};
}

inline double weighted_unchecked(const double* x, const std::uint8_t* rx, const double* y,
                                 const std::uint8_t* ry, std::size_t d) {
  const auto t = truncated_unchecked(x, rx, y, ry, d);
  return t.distance * (static_cast<double>(t.overlap) / static_cast<double>(d));
}

void check_lengths(std::size_t a, std::size_t b, std::size_t c, std::size_t e, const char* what) {
  if (a != b || a != c || a != e) throw ShapeError(std::string(what) + ": length mismatch");
}

} // namespace

double truncated_distance(std::span<const double> x, std::span<const std::uint8_t> rx,
                          std::span<const double> y, std::span<const std::uint8_t> ry) {
  check_lengths(x.size(), rx.size(), y.size(), ry.size(), "truncated_distance");
  return truncated_unchecked(x.data(), rx.data(), y.data(), ry.data(), x.size()).distance;
}

double weighted_distance(std::span<const double> x, std::span<const std::uint8_t> rx,
                         std::span<const double> y, std::span<const std::uint8_t> ry) {
  check_lengths(x.size(), rx.size(), y.size(), ry.size(), "weighted_distance");
  if (x.empty()) return 0.0;
  return weighted_unchecked(x.data(), rx.data(), y.data(), ry.data(), x.size());
}

namespace {

double entry(const IncompleteSample& a, std::size_t i, const IncompleteSample& b, std::size_t j,
             DistanceKind kind) {
  const std::size_t d = a.dim();
  const double* x = a.row(i).data();
  const double* y = b.row(j).data();
  const std::uint8_t* rx = a.response_row(i).data();
  const std::uint8_t* ry = b.response_row(j).data();
  switch (kind) {
  case DistanceKind::euclidean:
  case DistanceKind::truncated: return truncated_unchecked(x, rx, y, ry, d).distance;
  case DistanceKind::weighted: return weighted_unchecked(x, rx, y, ry, d);
  }
  return 0.0;
}

void require_complete(const IncompleteSample& s, DistanceKind kind) {
  if (kind == DistanceKind::euclidean && !s.fully_observed()) {
    throw PreconditionError("euclidean pairwise matrix requires complete rows");
  }
}

} // namespace

DistanceMatrix pairwise_matrix(const IncompleteSample& a, const IncompleteSample& b,
                               DistanceKind kind) {
  if (a.dim() != b.dim()) throw ShapeError("pairwise_matrix: dimension mismatch");
  require_complete(a, kind);
  require_complete(b, kind);
  DistanceMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = entry(a, i, b, j, kind);
  }
  return out;
}

DistanceMatrix pairwise_matrix(const IncompleteSample& s, DistanceKind kind) {
  require_complete(s, kind);
  const std::size_t n = s.rows();
  DistanceMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = entry(s, i, s, j, kind);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

} // namespace energy
