#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "energy/core_data.hpp"
#include "energy/imputation.hpp"
#include "energy/rng.hpp"
#include "energy/statistics.hpp"

namespace energy {

enum class StatisticKind { complete_case, weighted, imputed };

/// Bootstrap schemes: split_preserving resamples complete and incomplete
/// cases separately, pooled partitions the pooled sample, impute_bootstrap
/// partitions the pooled incomplete sample and imputes each half.
enum class Algorithm { split_preserving, pooled, impute_bootstrap };

std::string_view to_string(StatisticKind k);
std::string_view to_string(Algorithm a);

/// A testing procedure: statistic + resampling algorithm (+ imputer).
struct Procedure {
  StatisticKind statistic = StatisticKind::weighted;
  Algorithm algorithm = Algorithm::pooled;
  std::optional<ImputerSpec> imputer;
  std::size_t B = 1000;
  double alpha = 0.05;

  /// impute_bootstrap iff statistic == imputed; imputer present iff imputed;
  /// B >= 1; alpha in (0, 1).
  void validate() const;
  /// Stable identifier: alg1_cc, alg2_cc, alg1_w, alg2_w, alg3_mean,
  /// alg3_median, alg3_knn.
  std::string id() const;
  /// Human-readable name, e.g. "Alg2 T_W" or "Alg3 6NN".
  std::string label() const;

  /// Inverse of `id()`.
  static Procedure from_id(std::string_view id, std::size_t B = 1000, double alpha = 0.05,
                           std::size_t knn_k = 6);
};

/// The seven implemented procedures in legend order.
std::vector<Procedure> studied_procedures(std::size_t B = 1000, double alpha = 0.05,
                                          std::size_t knn_k = 6);

/// Number of slots in a legend cell: four complete-case/weighted procedures,
/// then mean, median, kNN and a reserved missForest slot.
inline constexpr std::size_t kLegendSlots = 8;
inline constexpr std::size_t kMissForestSlot = 7;
std::size_t legend_slot(const Procedure& p);
/// Label of each legend slot.
std::string_view legend_slot_name(std::size_t slot);

/// Indices into the pooled sample (rows of x, then rows of y).
struct Partition {
  std::vector<std::size_t> x;
  std::vector<std::size_t> y;
};

/// Complete pool split into (n_hat, m_hat), incomplete pool into
/// (n - n_hat, m - m_hat), each uniformly without replacement.
Partition split_preserving_partition(const IncompleteSample& x, const IncompleteSample& y,
                                     Rng& rng);
/// Uniform partition of n + m pooled cases into sizes n and m.
Partition pooled_partition(std::size_t n, std::size_t m, Rng& rng);

std::pair<IncompleteSample, IncompleteSample>
resample_split_preserving(const IncompleteSample& x, const IncompleteSample& y, Rng& rng);
std::pair<IncompleteSample, IncompleteSample>
resample_pooled(const IncompleteSample& x, const IncompleteSample& y, Rng& rng);

/// Order statistic at 1-based index ceil(level * B) of the ascending sort.
double empirical_quantile(std::span<const double> values, double level);

struct BootstrapOutcome {
  StatisticValue observed;
  std::vector<double> replicates;
  double critical_value = 0.0;
  double p_value = 1.0;  // #{replicates >= observed.raw} / B
  bool reject = false;   // observed.raw > critical_value
  double alpha = 0.05;
};

/// Statistic of the procedure on (x, y) plus B bootstrap replicates.
BootstrapOutcome bootstrap_test(const IncompleteSample& x, const IncompleteSample& y,
                                const Procedure& proc, Rng& rng);

/// Shared state for evaluating several procedures on one (x, y) pair: the
/// pooled sample and its weighted distance matrix, which also serves the
/// complete-case statistic (weighted and Euclidean distances coincide on
/// complete rows).
class PairContext {
public:
  PairContext(const IncompleteSample& x, const IncompleteSample& y);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }

  /// Observed statistic value of the procedure.
  StatisticValue observed(const Procedure& proc) const;
  /// One bootstrap replicate of the raw statistic.
  double replicate(const Procedure& proc, Rng& rng) const;

private:
  double raw_on(const Procedure& proc, const Partition& part) const;

  IncompleteSample x_;
  IncompleteSample y_;
  IncompleteSample pooled_;
  DistanceMatrix weighted_;
  std::size_t n_;
  std::size_t m_;
};

/// Produces one simulated (x, y) pair per Monte Carlo replicate.
using ReplicateGenerator = std::function<std::pair<IncompleteSample, IncompleteSample>(Rng&)>;

struct WarpSpeedOptions {
  std::size_t replicates = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  /// Columns over which average missing rates of x are reported (all if
  /// empty), and likewise for y.
  std::vector<std::size_t> rate_columns;
  std::vector<std::size_t> rate_columns_y;
};

struct WarpSpeedResult {
  std::vector<Procedure> procedures;
  std::vector<double> rejection_rate;  // per procedure, in [0, 1]
  std::vector<std::size_t> rejections; // per procedure, out of `replicates`
  std::vector<double> critical_value;  // per procedure
  double missing_rate_x = 0.0;         // averaged over replicates
  double missing_rate_y = 0.0;
  std::size_t replicates = 0;
};

/// Warp-speed Monte Carlo: each replicate draws one dataset (shared by all
/// procedures), computes the observed statistic and exactly one resampled
/// statistic per procedure. The critical value is the (1 - alpha) empirical
/// quantile of the N resampled values; the rejection rate is the fraction of
/// observed values strictly above it. Replicate b uses a generator derived
/// from (seed, b), so the result does not depend on `jobs`.
/// Any replicate-level error aborts the study with a diagnostic naming it.
WarpSpeedResult warp_speed_study(const ReplicateGenerator& generate,
                                 std::span<const Procedure> procedures,
                                 const WarpSpeedOptions& options);

} // namespace energy
