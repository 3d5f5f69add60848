#include "energy/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "energy/errors.hpp"
#include "energy/missingness.hpp"
#include "energy/parallel.hpp"

namespace energy {

std::string_view to_string(StatisticKind k) {
  switch (k) {
  case StatisticKind::complete_case: return "complete_case";
  case StatisticKind::weighted: return "weighted";
  case StatisticKind::imputed: return "imputed";
  }
  return "unknown";
}

std::string_view to_string(Algorithm a) {
  switch (a) {
  case Algorithm::split_preserving: return "split_preserving";
  case Algorithm::pooled: return "pooled";
  case Algorithm::impute_bootstrap: return "impute_bootstrap";
  }
  return "unknown";
}

void Procedure::validate() const {
  const bool imputed = statistic == StatisticKind::imputed;
  if (imputed != (algorithm == Algorithm::impute_bootstrap)) {
    throw ParameterError("procedure: the imputation algorithm goes with the imputed statistic");
  }
  if (imputed != imputer.has_value()) {
    throw ParameterError("procedure: an imputer is required exactly for the imputed statistic");
  }
  if (imputer) imputer->validate();
  if (B < 1) throw ParameterError("procedure: B must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("procedure: alpha must lie in (0, 1)");
}

std::string Procedure::id() const {
  if (statistic == StatisticKind::imputed) {
    return "alg3_" + std::string(imputer ? to_string(imputer->kind) : "none");
  }
  const std::string alg = algorithm == Algorithm::split_preserving ? "alg1" : "alg2";
  return alg + (statistic == StatisticKind::complete_case ? "_cc" : "_w");
}

std::string Procedure::label() const {
  if (statistic == StatisticKind::imputed) {
    return "Alg3 " + (imputer ? imputer->label() : std::string("?"));
  }
  const std::string alg = algorithm == Algorithm::split_preserving ? "Alg1" : "Alg2";
  return alg + (statistic == StatisticKind::complete_case ? " T_CC" : " T_W");
}

Procedure Procedure::from_id(std::string_view id, std::size_t B, double alpha, std::size_t knn_k) {
  Procedure p;
  p.B = B;
  p.alpha = alpha;
  if (id == "alg1_cc" || id == "alg2_cc" || id == "alg1_w" || id == "alg2_w") {
    p.algorithm = id.substr(0, 4) == "alg1" ? Algorithm::split_preserving : Algorithm::pooled;
    p.statistic = id.substr(5) == "cc" ? StatisticKind::complete_case : StatisticKind::weighted;
  } else if (id.substr(0, 5) == "alg3_") {
    p.statistic = StatisticKind::imputed;
    p.algorithm = Algorithm::impute_bootstrap;
    p.imputer = ImputerSpec{imputer_kind_from_string(id.substr(5)), knn_k};
  } else {
    throw ParameterError("unknown procedure '" + std::string(id) + "'");
  }
  p.validate();
  return p;
}

std::vector<Procedure> studied_procedures(std::size_t B, double alpha, std::size_t knn_k) {
  std::vector<Procedure> out;
  for (const char* id : {"alg1_cc", "alg2_cc", "alg1_w", "alg2_w", "alg3_mean", "alg3_median",
                         "alg3_knn"}) {
    out.push_back(Procedure::from_id(id, B, alpha, knn_k));
  }
  return out;
}

std::size_t legend_slot(const Procedure& p) {
  if (p.statistic == StatisticKind::imputed) {
    switch (p.imputer->kind) {
    case ImputerKind::mean: return 4;
    case ImputerKind::median: return 5;
    case ImputerKind::knn: return 6;
    }
  }
  const std::size_t base = p.statistic == StatisticKind::complete_case ? 0 : 2;
  return base + (p.algorithm == Algorithm::split_preserving ? 0 : 1);
}

std::string_view legend_slot_name(std::size_t slot) {
  static constexpr std::string_view names[kLegendSlots] = {
      "alg1_cc", "alg2_cc", "alg1_w", "alg2_w", "alg3_mean", "alg3_median", "alg3_knn",
      "alg3_missforest"};
  return slot < kLegendSlots ? names[slot] : "unknown";
}

namespace {

// Uniformly random split of `pool` into the first `first` elements and the
// rest.
void split_pool(std::vector<std::size_t>& pool, std::size_t first, Rng& rng,
                std::vector<std::size_t>& a, std::vector<std::size_t>& b) {
  std::shuffle(pool.begin(), pool.end(), rng);
  a.insert(a.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(first));
  b.insert(b.end(), pool.begin() + static_cast<std::ptrdiff_t>(first), pool.end());
}

} // namespace

Partition split_preserving_partition(const IncompleteSample& x, const IncompleteSample& y,
                                     Rng& rng) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> complete;
  std::vector<std::size_t> incomplete;
  for (std::size_t i = 0; i < n; ++i) (x.is_complete(i) ? complete : incomplete).push_back(i);
  for (std::size_t j = 0; j < y.rows(); ++j) {
    (y.is_complete(j) ? complete : incomplete).push_back(n + j);
  }
  Partition part;
  part.x.reserve(n);
  part.y.reserve(y.rows());
  split_pool(complete, x.complete_count(), rng, part.x, part.y);
  split_pool(incomplete, n - x.complete_count(), rng, part.x, part.y);
  return part;
}

Partition pooled_partition(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::size_t> pool(n + m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Partition part;
  part.x.reserve(n);
  part.y.reserve(m);
  split_pool(pool, n, rng, part.x, part.y);
  return part;
}

namespace {

std::pair<IncompleteSample, IncompleteSample> materialize(const IncompleteSample& x,
                                                          const IncompleteSample& y,
                                                          const Partition& part) {
  const IncompleteSample pooled = concatenate(x, y);
  return {pooled.select_rows(part.x), pooled.select_rows(part.y)};
}

} // namespace

std::pair<IncompleteSample, IncompleteSample>
resample_split_preserving(const IncompleteSample& x, const IncompleteSample& y, Rng& rng) {
  if (x.dim() != y.dim()) throw ShapeError("resample: dimension mismatch");
  return materialize(x, y, split_preserving_partition(x, y, rng));
}

std::pair<IncompleteSample, IncompleteSample>
resample_pooled(const IncompleteSample& x, const IncompleteSample& y, Rng& rng) {
  if (x.dim() != y.dim()) throw ShapeError("resample: dimension mismatch");
  if (x.rows() + y.rows() < 2) throw PreconditionError("resample_pooled: need n + m >= 2");
  return materialize(x, y, pooled_partition(x.rows(), y.rows(), rng));
}

double empirical_quantile(std::span<const double> values, double level) {
  if (values.empty()) throw EmptyInputError("empirical_quantile: no values");
  if (!(level > 0.0 && level <= 1.0)) throw ParameterError("empirical_quantile: level in (0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  const auto B = static_cast<double>(sorted.size());
  // Guard against level * B landing a hair above an integer.
  auto idx = static_cast<std::size_t>(std::ceil(level * B - 1e-9));
  idx = std::clamp<std::size_t>(idx, 1, sorted.size());
  const auto it = sorted.begin() + static_cast<std::ptrdiff_t>(idx - 1);
  std::nth_element(sorted.begin(), it, sorted.end());
  return *it;
}

PairContext::PairContext(const IncompleteSample& x, const IncompleteSample& y)
    : x_(x), y_(y), n_(x.rows()), m_(y.rows()) {
  if (x.dim() != y.dim()) throw ShapeError("procedure: dimension mismatch");
  if (n_ == 0 || m_ == 0) throw EmptyInputError("procedure: empty sample");
  pooled_ = concatenate(x_, y_);
  weighted_ = pairwise_matrix(pooled_, DistanceKind::weighted);
}

namespace {

std::vector<std::size_t> complete_only(const IncompleteSample& pooled,
                                       std::span<const std::size_t> idx) {
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    if (pooled.is_complete(i)) out.push_back(i);
  }
  return out;
}

double imputed_raw(const IncompleteSample& a, const IncompleteSample& b, const ImputerSpec& spec) {
  const auto imputer = make_imputer(spec);
  const IncompleteSample ia(imputer->impute(a));
  const IncompleteSample ib(imputer->impute(b));
  return raw_statistic_in_order(ia, ib, DistanceKind::euclidean);
}

} // namespace

double PairContext::raw_on(const Procedure& proc, const Partition& part) const {
  switch (proc.statistic) {
  case StatisticKind::weighted: return energy_from_pooled(weighted_, part.x, part.y);
  case StatisticKind::complete_case: {
    const auto cx = complete_only(pooled_, part.x);
    const auto cy = complete_only(pooled_, part.y);
    if (cx.empty()) throw NoCompleteCasesError("x");
    if (cy.empty()) throw NoCompleteCasesError("y");
    return energy_from_pooled(weighted_, cx, cy);
  }
  case StatisticKind::imputed:
    return imputed_raw(pooled_.select_rows(part.x), pooled_.select_rows(part.y), *proc.imputer);
  }
  return 0.0;
}

StatisticValue PairContext::observed(const Procedure& proc) const {
  StatisticValue v;
  v.n = n_;
  v.m = m_;
  switch (proc.statistic) {
  case StatisticKind::weighted: {
    Partition id;
    id.x.resize(n_);
    id.y.resize(m_);
    std::iota(id.x.begin(), id.x.end(), std::size_t{0});
    std::iota(id.y.begin(), id.y.end(), n_);
    v.raw = raw_on(proc, id);
    v.scaled = v.raw * scaling_factor(n_, m_);
    v.variant = StatisticVariant::weighted;
    break;
  }
  case StatisticKind::complete_case: {
    Partition id;
    id.x.resize(n_);
    id.y.resize(m_);
    std::iota(id.x.begin(), id.x.end(), std::size_t{0});
    std::iota(id.y.begin(), id.y.end(), n_);
    v.raw = raw_on(proc, id);
    v.n_hat = x_.complete_count();
    v.m_hat = y_.complete_count();
    v.scaled = v.raw * scaling_factor(*v.n_hat, *v.m_hat);
    v.variant = StatisticVariant::complete_case;
    break;
  }
  case StatisticKind::imputed:
    v.raw = imputed_raw(x_, y_, *proc.imputer);
    v.scaled = v.raw * scaling_factor(n_, m_);
    v.variant = StatisticVariant::imputed;
    break;
  }
  return v;
}

double PairContext::replicate(const Procedure& proc, Rng& rng) const {
  switch (proc.algorithm) {
  case Algorithm::split_preserving: return raw_on(proc, split_preserving_partition(x_, y_, rng));
  case Algorithm::pooled:
  case Algorithm::impute_bootstrap: return raw_on(proc, pooled_partition(n_, m_, rng));
  }
  return 0.0;
}

BootstrapOutcome bootstrap_test(const IncompleteSample& x, const IncompleteSample& y,
                                const Procedure& proc, Rng& rng) {
  proc.validate();
  const PairContext ctx(x, y);
  BootstrapOutcome out;
  out.alpha = proc.alpha;
  out.observed = ctx.observed(proc);
  out.replicates.reserve(proc.B);
  for (std::size_t b = 0; b < proc.B; ++b) out.replicates.push_back(ctx.replicate(proc, rng));
  out.critical_value = empirical_quantile(out.replicates, 1.0 - proc.alpha);
  const auto exceed = std::count_if(out.replicates.begin(), out.replicates.end(),
                                    [&](double r) { return r >= out.observed.raw; });
  out.p_value = static_cast<double>(exceed) / static_cast<double>(proc.B);
  out.reject = out.observed.raw > out.critical_value;
  return out;
}

WarpSpeedResult warp_speed_study(const ReplicateGenerator& generate,
                                 std::span<const Procedure> procedures,
                                 const WarpSpeedOptions& options) {
  if (options.replicates < 100) throw PreconditionError("warp_speed_study: need N >= 100");
  if (procedures.empty()) throw ParameterError("warp_speed_study: no procedures");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw ParameterError("warp_speed_study: alpha must lie in (0, 1)");
  }
  for (const auto& p : procedures) p.validate();

  const std::size_t N = options.replicates;
  const std::size_t P = procedures.size();
  std::vector<double> observed(N * P);
  std::vector<double> resampled(N * P);
  std::vector<double> rate_x(N);
  std::vector<double> rate_y(N);
  std::vector<std::string> errors(N);

  auto run_one = [&](std::size_t b) {
    try {
      Rng rng = child_rng(options.seed, b);
      auto [x, y] = generate(rng);
      rate_x[b] = missing_rate(x, options.rate_columns);
      rate_y[b] = missing_rate(y, options.rate_columns_y);
      const PairContext ctx(x, y);
      for (std::size_t p = 0; p < P; ++p) {
        observed[b * P + p] = ctx.observed(procedures[p]).raw;
        resampled[b * P + p] = ctx.replicate(procedures[p], rng);
      }
    } catch (const std::exception& e) {
      errors[b] = e.what();
    }
  };

  parallel_for(N, options.jobs, run_one);

  for (std::size_t b = 0; b < N; ++b) {
    if (!errors[b].empty()) {
      throw NumericError("replicate " + std::to_string(b) + " (seed " +
                         std::to_string(options.seed) + "): " + errors[b]);
    }
  }

  WarpSpeedResult result;
  result.procedures.assign(procedures.begin(), procedures.end());
  result.replicates = N;
  std::vector<double> column(N);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t b = 0; b < N; ++b) column[b] = resampled[b * P + p];
    const double crit = empirical_quantile(column, 1.0 - options.alpha);
    std::size_t rejections = 0;
    for (std::size_t b = 0; b < N; ++b) rejections += observed[b * P + p] > crit ? 1 : 0;
    result.critical_value.push_back(crit);
    result.rejections.push_back(rejections);
    result.rejection_rate.push_back(static_cast<double>(rejections) / static_cast<double>(N));
  }
  result.missing_rate_x = std::accumulate(rate_x.begin(), rate_x.end(), 0.0) / static_cast<double>(N);
  result.missing_rate_y = std::accumulate(rate_y.begin(), rate_y.end(), 0.0) / static_cast<double>(N);
  return result;
}

} // namespace energy
