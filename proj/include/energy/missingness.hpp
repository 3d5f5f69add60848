#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "energy/core_data.hpp"
#include "energy/rng.hpp"

namespace energy {

enum class Mechanism { mcar, mar_1to9, mar_rank, mar_logistic };

std::string_view to_string(Mechanism m);
Mechanism mechanism_from_string(std::string_view name);

/// Logistic missingness model. `slopes` either has one entry per control
/// column (a shared linear predictor for all targets), or, with a single
/// control column, one entry per target column (target t uses
/// `intercept + slopes[t] * control`).
struct LogisticModel {
  double intercept = 0.0;
  std::vector<double> slopes;
};

/// Configuration of one missingness mechanism.
///
/// `probabilities` is per variable (length d) for mcar, mar_1to9 and
/// mar_rank; for the MAR variants only the entries of target columns are
/// used. MAR 1-to-9 and MAR rank take either one control column for all
/// targets or one control per target, paired by position.
struct MissingnessSpec {
  Mechanism mechanism = Mechanism::mcar;
  std::vector<double> probabilities;
  std::vector<std::size_t> controls;
  std::vector<std::size_t> targets;
  LogisticModel logistic;

  /// Throws ParameterError when inconsistent with dimension `d`.
  void validate(std::size_t d) const;
  /// Columns that may be made missing.
  std::vector<std::size_t> affected_columns(std::size_t d) const;
};

/// Standard logistic function.
double logistic(double x);

/// Each cell (i, k) independently missing with probability p[k]. Input must
/// be fully observed.
IncompleteSample apply_mcar(const IncompleteSample& sample, std::span<const double> p, Rng& rng);

/// Median split of the control column (ties with the median go low); target
/// cells are missing with probability p/5 below and 9p/5 above, so the
/// average rate is p and the odds ratio between groups is 9. If the upper
/// group is empty (e.g. constant control) the rate is p for every row.
/// Throws ParameterError if 9p/5 > 1.
IncompleteSample apply_mar_1to9(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets, double p, Rng& rng);
/// Per-target rates (indexed by column, as in MissingnessSpec::probabilities).
IncompleteSample apply_mar_1to9(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets,
                                std::span<const double> p_by_column, Rng& rng);

/// For each target column exactly round(p * n) cells are deleted, drawn
/// without replacement with weights proportional to the (average) rank of the
/// control value.
IncompleteSample apply_mar_rank(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets, double p, Rng& rng);
IncompleteSample apply_mar_rank(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets,
                                std::span<const double> p_by_column, Rng& rng);

/// Each target cell independently missing with probability
/// logistic(intercept + slopes . controls_i). Control columns are never
/// touched.
IncompleteSample apply_mar_logistic(const IncompleteSample& sample,
                                    std::span<const std::size_t> controls,
                                    std::span<const std::size_t> targets,
                                    const LogisticModel& model, Rng& rng);

/// Dispatch on `spec.mechanism`.
IncompleteSample apply_missingness(const IncompleteSample& sample, const MissingnessSpec& spec,
                                   Rng& rng);

/// Average ranks (1-based) of `values`, ties sharing the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> values);

/// Draws covariate rows for calibration; columns correspond to slopes.
using CovariateSampler = std::function<DataMatrix(Rng&, std::size_t rows, std::size_t cols)>;

/// IID standard normal covariates.
CovariateSampler standard_normal_covariates();

/// Mean of logistic(intercept + slopes . c) over the rows of `covariates`.
double average_logistic_rate(double intercept, std::span<const double> slopes,
                             const DataMatrix& covariates);

struct CalibrationResult {
  double intercept = 0.0;
  double achieved_rate = 0.0;
  std::size_t iterations = 0;
};

/// Bisection on the intercept so that the Monte Carlo average rate over
/// `mc_size` reference draws is within `tol` of `target_rate`. The draws are
/// fixed for the whole search, which keeps the objective monotone.
/// Throws ParameterError for a target outside (0.001, 0.999) and
/// CalibrationError after 200 iterations without convergence.
CalibrationResult calibrate_logistic_intercept(double target_rate, std::span<const double> slopes,
                                               const CovariateSampler& reference,
                                               std::size_t mc_size, double tol, Rng& rng);

/// Fraction of missing cells over `columns` (all columns if empty).
double missing_rate(const IncompleteSample& sample, std::span<const std::size_t> columns = {});

} // namespace energy
