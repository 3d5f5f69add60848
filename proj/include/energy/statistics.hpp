#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

#include "energy/core_data.hpp"
#include "energy/distance.hpp"
#include "energy/rng.hpp"

namespace energy {

enum class StatisticVariant { classic, complete_case, weighted, imputed };

std::string_view to_string(StatisticVariant v);

/// A two-sample energy statistic and its scaled form.
///
/// `scaled = raw * n_eff * m_eff / (n_eff + m_eff)`, with the complete-case
/// counts as effective sizes for the complete-case variant and the full
/// sample sizes otherwise.
struct StatisticValue {
  double raw = 0.0;
  double scaled = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<std::size_t> n_hat;
  std::optional<std::size_t> m_hat;
  StatisticVariant variant = StatisticVariant::classic;
};

double scaling_factor(std::size_t n_eff, std::size_t m_eff);

/// V-statistic form of the energy statistic from a distance matrix over a
/// pooled sample: `xs` and `ys` index the two groups.
///
///   2/(nm) sum_{x,y} D - (1/n^2 sum_{x,x'} D + 1/m^2 sum_{y,y'} D)
///
/// Sums run in the order of `xs` / `ys`; diagonal terms are included.
double energy_from_pooled(const DistanceMatrix& pooled, std::span<const std::size_t> xs,
                          std::span<const std::size_t> ys);

/// Raw statistic with `x` pooled before `y` (no canonical reordering). This
/// is the path used inside resampling loops.
double raw_statistic_in_order(const IncompleteSample& x, const IncompleteSample& y,
                              DistanceKind kind);

/// Classic statistic; both samples must be fully observed and non-empty.
StatisticValue energy_statistic(const IncompleteSample& x, const IncompleteSample& y);
StatisticValue energy_statistic(const DataMatrix& x, const DataMatrix& y);

/// Classic statistic on the complete subsamples. Throws NoCompleteCasesError
/// when either sample has no complete case.
StatisticValue cc_statistic(const IncompleteSample& x, const IncompleteSample& y);

/// Statistic built on the weighted distance; every row participates.
StatisticValue weighted_statistic(const IncompleteSample& x, const IncompleteSample& y);

/// One case: values with their response indicators.
struct CaseView {
  std::span<const double> values;
  std::span<const std::uint8_t> response;
};

inline CaseView case_of(const IncompleteSample& s, std::size_t i) {
  return {s.row(i), s.response_row(i)};
}

/// rho_W(x1,y2) + rho_W(x2,y1) - rho_W(x1,x2) - rho_W(y1,y2).
double h_w_kernel(const CaseView& x1, const CaseView& x2, const CaseView& y1, const CaseView& y2);

/// Draws `rows` IID cases (with their response pattern) from one law.
using CaseSampler = std::function<IncompleteSample(Rng&, std::size_t rows)>;

struct NullMeanCheck {
  double mc_mean = 0.0;  // mean of the scaled statistic over replicates
  double eta_hat = 0.0;  // independent estimate of E rho(X, Y)
  double se = 0.0;       // standard error of mc_mean - eta_hat
};

/// Under H0 the scaled V-statistic has expectation exactly E rho(X, Y), for
/// any n, m, because self-distances vanish. This checks that identity by
/// simulation: `replicates` draws of the scaled statistic (both samples from
/// `sampler`) against an estimate of E rho from `eta_pairs` independent
/// pairs. `variant` selects classic (data must be complete) or weighted.
NullMeanCheck null_mean_identity_check(const CaseSampler& sampler, std::size_t n, std::size_t m,
                                       std::size_t replicates, std::uint64_t seed,
                                       StatisticVariant variant = StatisticVariant::weighted,
                                       std::size_t eta_pairs = 1'000'000);

} // namespace energy
