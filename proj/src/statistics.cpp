#include "energy/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "energy/errors.hpp"

namespace energy {

std::string_view to_string(StatisticVariant v) {
  switch (v) {
  case StatisticVariant::classic: return "classic";
  case StatisticVariant::complete_case: return "complete_case";
  case StatisticVariant::weighted: return "weighted";
  case StatisticVariant::imputed: return "imputed";
  }
  return "unknown";
}

double scaling_factor(std::size_t n_eff, std::size_t m_eff) {
  const double n = static_cast<double>(n_eff);
  const double m = static_cast<double>(m_eff);
  return n * m / (n + m);
}

double energy_from_pooled(const DistanceMatrix& pooled, std::span<const std::size_t> xs,
                          std::span<const std::size_t> ys) {
  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t a : xs) {
    const double* row = pooled.row_ptr(a);
    for (std::size_t b : ys) sxy += row[b];
    for (std::size_t b : xs) sxx += row[b];
  }
  for (std::size_t a : ys) {
    const double* row = pooled.row_ptr(a);
    for (std::size_t b : ys) syy += row[b];
  }
  // The within-group terms are added before subtracting so that swapping the
  // groups leaves the result bit-identical.
  return 2.0 * sxy / (n * m) - (sxx / (n * n) + syy / (m * m));
}

namespace {

// Deterministic total order on samples, used to pool a pair in an order that
// does not depend on argument order.
bool canonical_less(const IncompleteSample& a, const IncompleteSample& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  const auto va = a.data().values();
  const auto vb = b.data().values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (va[i] != vb[i]) return va[i] < vb[i];
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ra = a.response_row(i);
    const auto rb = b.response_row(i);
    for (std::size_t k = 0; k < ra.size(); ++k) {
      if (ra[k] != rb[k]) return ra[k] < rb[k];
    }
  }
  return false;
}

// Rows in a fixed lexicographic order (values, then response flags), so
// that the summation order and hence the result do not depend on row order.
IncompleteSample canonical_rows(const IncompleteSample& s) {
  std::vector<std::size_t> order(s.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto va = s.row(a);
    const auto vb = s.row(b);
    for (std::size_t k = 0; k < va.size(); ++k) {
      if (va[k] != vb[k]) return va[k] < vb[k];
    }
    const auto ra = s.response_row(a);
    const auto rb = s.response_row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  return s.select_rows(order);
}

double raw_statistic(const IncompleteSample& x, const IncompleteSample& y, DistanceKind kind) {
  const IncompleteSample cx = canonical_rows(x);
  const IncompleteSample cy = canonical_rows(y);
  const bool swap = canonical_less(cy, cx);
  return swap ? raw_statistic_in_order(cy, cx, kind) : raw_statistic_in_order(cx, cy, kind);
}

void require_nonempty(const IncompleteSample& x, const IncompleteSample& y) {
  if (x.rows() == 0 || y.rows() == 0) throw EmptyInputError("statistic: empty sample");
  if (x.dim() != y.dim()) throw ShapeError("statistic: dimension mismatch");
}

} // namespace

double raw_statistic_in_order(const IncompleteSample& x, const IncompleteSample& y,
                              DistanceKind kind) {
  const IncompleteSample pooled = concatenate(x, y);
  const DistanceMatrix d = pairwise_matrix(pooled, kind);
  std::vector<std::size_t> a(x.rows());
  std::vector<std::size_t> b(y.rows());
  std::iota(a.begin(), a.end(), std::size_t{0});
  std::iota(b.begin(), b.end(), x.rows());
  return energy_from_pooled(d, a, b);
}

StatisticValue energy_statistic(const IncompleteSample& x, const IncompleteSample& y) {
  require_nonempty(x, y);
  if (!x.fully_observed() || !y.fully_observed()) {
    throw PreconditionError("energy_statistic: samples must be fully observed");
  }
  StatisticValue out;
  out.raw = raw_statistic(x, y, DistanceKind::euclidean);
  out.n = x.rows();
  out.m = y.rows();
  out.scaled = out.raw * scaling_factor(out.n, out.m);
  out.variant = StatisticVariant::classic;
  return out;
}

StatisticValue energy_statistic(const DataMatrix& x, const DataMatrix& y) {
  return energy_statistic(IncompleteSample(x), IncompleteSample(y));
}

StatisticValue cc_statistic(const IncompleteSample& x, const IncompleteSample& y) {
  if (x.dim() != y.dim()) throw ShapeError("statistic: dimension mismatch");
  if (x.complete_count() == 0) throw NoCompleteCasesError("x");
  if (y.complete_count() == 0) throw NoCompleteCasesError("y");
  StatisticValue out = energy_statistic(complete_subsample(x), complete_subsample(y));
  out.n = x.rows();
  out.m = y.rows();
  out.n_hat = x.complete_count();
  out.m_hat = y.complete_count();
  out.scaled = out.raw * scaling_factor(*out.n_hat, *out.m_hat);
  out.variant = StatisticVariant::complete_case;
  return out;
}

StatisticValue weighted_statistic(const IncompleteSample& x, const IncompleteSample& y) {
  require_nonempty(x, y);
  StatisticValue out;
  out.raw = raw_statistic(x, y, DistanceKind::weighted);
  out.n = x.rows();
  out.m = y.rows();
  out.scaled = out.raw * scaling_factor(out.n, out.m);
  out.variant = StatisticVariant::weighted;
  return out;
}

double h_w_kernel(const CaseView& x1, const CaseView& x2, const CaseView& y1, const CaseView& y2) {
  const auto rho = [](const CaseView& a, const CaseView& b) {
    return weighted_distance(a.values, a.response, b.values, b.response);
  };
  return rho(x1, y2) + rho(x2, y1) - rho(x1, x2) - rho(y1, y2);
}

NullMeanCheck null_mean_identity_check(const CaseSampler& sampler, std::size_t n, std::size_t m,
                                       std::size_t replicates, std::uint64_t seed,
                                       StatisticVariant variant, std::size_t eta_pairs) {
  if (replicates < 2) throw PreconditionError("null_mean_identity_check: replicates < 2");
  if (eta_pairs < 2) throw PreconditionError("null_mean_identity_check: eta_pairs < 2");
  if (n == 0 || m == 0) throw EmptyInputError("null_mean_identity_check: empty sample size");
  if (variant != StatisticVariant::classic && variant != StatisticVariant::weighted) {
    throw ParameterError("null_mean_identity_check: variant must be classic or weighted");
  }
  const bool weighted = variant == StatisticVariant::weighted;

  double sum = 0.0;
  double sumsq = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng rng = child_rng(seed, 0, r);
    const IncompleteSample x = sampler(rng, n);
    const IncompleteSample y = sampler(rng, m);
    const double t = weighted ? weighted_statistic(x, y).scaled : energy_statistic(x, y).scaled;
    sum += t;
    sumsq += t * t;
  }
  const double reps = static_cast<double>(replicates);
  const double mean_t = sum / reps;
  const double var_t = std::max(0.0, (sumsq - reps * mean_t * mean_t) / (reps - 1.0));

  Rng rng = child_rng(seed, 1);
  const IncompleteSample a = sampler(rng, eta_pairs);
  const IncompleteSample b = sampler(rng, eta_pairs);
  if (!weighted && (!a.fully_observed() || !b.fully_observed())) {
    throw PreconditionError("null_mean_identity_check: classic variant needs complete data");
  }
  double esum = 0.0;
  double esumsq = 0.0;
  for (std::size_t i = 0; i < eta_pairs; ++i) {
    const double r = weighted ? weighted_distance(a.row(i), a.response_row(i), b.row(i),
                                                  b.response_row(i))
                              : euclidean(a.row(i), b.row(i));
    esum += r;
    esumsq += r * r;
  }
  const double pairs = static_cast<double>(eta_pairs);
  const double eta = esum / pairs;
  const double var_r = std::max(0.0, (esumsq - pairs * eta * eta) / (pairs - 1.0));

  return {mean_t, eta, std::sqrt(var_t / reps + var_r / pairs)};
}

} // namespace energy
