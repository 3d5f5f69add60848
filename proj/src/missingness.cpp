#include "energy/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "energy/errors.hpp"

namespace energy {

std::string_view to_string(Mechanism m) {
  switch (m) {
  case Mechanism::mcar: return "mcar";
  case Mechanism::mar_1to9: return "mar_1to9";
  case Mechanism::mar_rank: return "mar_rank";
  case Mechanism::mar_logistic: return "mar_logistic";
  }
  return "unknown";
}

Mechanism mechanism_from_string(std::string_view name) {
  if (name == "mcar") return Mechanism::mcar;
  if (name == "mar_1to9") return Mechanism::mar_1to9;
  if (name == "mar_rank") return Mechanism::mar_rank;
  if (name == "mar_logistic") return Mechanism::mar_logistic;
  throw ParameterError("unknown missingness mechanism '" + std::string(name) + "'");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void require_complete(const IncompleteSample& s, const char* what) {
  if (!s.fully_observed()) throw PreconditionError(std::string(what) + ": input must be complete");
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError(std::string(what) + ": probability must lie in [0, 1]");
  }
}

void check_columns(std::span<const std::size_t> cols, std::size_t d, const char* what) {
  for (auto c : cols) {
    if (c >= d) throw ParameterError(std::string(what) + ": column index out of range");
  }
}

void check_disjoint(std::span<const std::size_t> controls, std::span<const std::size_t> targets) {
  for (auto c : controls) {
    if (std::find(targets.begin(), targets.end(), c) != targets.end()) {
      throw ParameterError("control and target columns must be disjoint");
    }
  }
}

// Mutable copy of a complete sample's response matrix.
struct Mask {
  explicit Mask(const IncompleteSample& s) : data(s.data()), response(s.response()) {}
  IncompleteSample finish() { return {std::move(data), std::move(response)}; }
  DataMatrix data;
  ResponseMatrix response;
};

std::vector<double> broadcast(double p, std::span<const std::size_t> targets, std::size_t d) {
  std::vector<double> out(d, 0.0);
  for (auto t : targets) out[t] = p;
  return out;
}

} // namespace

void MissingnessSpec::validate(std::size_t d) const {
  check_columns(controls, d, "missingness");
  check_columns(targets, d, "missingness");
  check_disjoint(controls, targets);
  if (mechanism != Mechanism::mar_logistic) {
    if (probabilities.size() != d) {
      throw ParameterError("missingness: expected " + std::to_string(d) + " probabilities");
    }
    for (double p : probabilities) check_probability(p, "missingness");
  }
  switch (mechanism) {
  case Mechanism::mcar: break;
  case Mechanism::mar_1to9:
  case Mechanism::mar_rank:
    if (controls.size() != 1 && controls.size() != targets.size()) {
      throw ParameterError("missingness: one control column, or one per target");
    }
    if (targets.empty()) throw ParameterError("missingness: no target columns");
    if (mechanism == Mechanism::mar_1to9) {
      for (auto t : targets) {
        if (probabilities[t] * 9.0 / 5.0 > 1.0) {
          throw ParameterError("mar_1to9: infeasible rate, 9p/5 exceeds 1");
        }
      }
    }
    break;
  case Mechanism::mar_logistic:
    if (controls.empty() || targets.empty()) {
      throw ParameterError("mar_logistic: controls and targets required");
    }
    if (logistic.slopes.size() != controls.size() &&
        !(controls.size() == 1 && logistic.slopes.size() == targets.size())) {
      throw ParameterError("mar_logistic: slopes must match controls (or targets, with one control)");
    }
    break;
  }
}

std::vector<std::size_t> MissingnessSpec::affected_columns(std::size_t d) const {
  if (mechanism == Mechanism::mcar) {
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < d && k < probabilities.size(); ++k) {
      if (probabilities[k] > 0.0) cols.push_back(k);
    }
    return cols;
  }
  return targets;
}

IncompleteSample apply_mcar(const IncompleteSample& sample, std::span<const double> p, Rng& rng) {
  require_complete(sample, "apply_mcar");
  if (p.size() != sample.dim()) throw ShapeError("apply_mcar: need one probability per column");
  for (double v : p) check_probability(v, "apply_mcar");
  Mask mask(sample);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    for (std::size_t k = 0; k < sample.dim(); ++k) {
      if (unif(rng) < p[k]) mask.response.set(i, k, false);
    }
  }
  return mask.finish();
}

IncompleteSample apply_mar_1to9(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets,
                                std::span<const double> p_by_column, Rng& rng) {
  require_complete(sample, "apply_mar_1to9");
  const std::size_t d = sample.dim();
  const std::size_t controls[] = {control};
  check_columns(controls, d, "apply_mar_1to9");
  check_columns(targets, d, "apply_mar_1to9");
  check_disjoint(controls, targets);
  if (p_by_column.size() != d) throw ShapeError("apply_mar_1to9: need one probability per column");
  for (auto t : targets) {
    check_probability(p_by_column[t], "apply_mar_1to9");
    if (p_by_column[t] * 9.0 / 5.0 > 1.0) {
      throw ParameterError("apply_mar_1to9: infeasible rate, 9p/5 exceeds 1");
    }
  }
  const std::size_t n = sample.rows();
  std::vector<double> ctrl(n);
  for (std::size_t i = 0; i < n; ++i) ctrl[i] = sample.value(i, control);
  std::vector<double> sorted = ctrl;
  std::sort(sorted.begin(), sorted.end());
  const double median =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<bool> upper(n);
  bool any_upper = false;
  for (std::size_t i = 0; i < n; ++i) {
    upper[i] = ctrl[i] > median;
    any_upper = any_upper || upper[i];
  }

  Mask mask(sample);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto t : targets) {
      const double p = p_by_column[t];
      const double rate = !any_upper ? p : (upper[i] ? 9.0 * p / 5.0 : p / 5.0);
      if (unif(rng) < rate) mask.response.set(i, t, false);
    }
  }
  return mask.finish();
}

IncompleteSample apply_mar_1to9(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets, double p, Rng& rng) {
  check_columns(targets, sample.dim(), "apply_mar_1to9");
  const auto per = broadcast(p, targets, sample.dim());
  return apply_mar_1to9(sample, control, targets, per, rng);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

IncompleteSample apply_mar_rank(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets,
                                std::span<const double> p_by_column, Rng& rng) {
  require_complete(sample, "apply_mar_rank");
  const std::size_t d = sample.dim();
  const std::size_t controls[] = {control};
  check_columns(controls, d, "apply_mar_rank");
  check_columns(targets, d, "apply_mar_rank");
  check_disjoint(controls, targets);
  if (p_by_column.size() != d) throw ShapeError("apply_mar_rank: need one probability per column");
  const std::size_t n = sample.rows();
  std::vector<double> ctrl(n);
  for (std::size_t i = 0; i < n; ++i) ctrl[i] = sample.value(i, control);
  const std::vector<double> weights = average_ranks(ctrl);

  Mask mask(sample);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keys(n);
  for (auto t : targets) {
    const double p = p_by_column[t];
    check_probability(p, "apply_mar_rank");
    const auto count = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    if (count == 0) continue;
    // Weighted sampling without replacement (Efraimidis-Spirakis): the
    // `count` largest keys log(u)/w follow the sequential draw law.
    for (std::size_t i = 0; i < n; ++i) {
      double u = unif(rng);
      while (u <= 0.0) u = unif(rng);
      keys[i] = {std::log(u) / weights[i], i};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(),
                      [](const auto& a, const auto& b) {
                        return a.first > b.first || (a.first == b.first && a.second < b.second);
                      });
    for (std::size_t c = 0; c < count; ++c) mask.response.set(keys[c].second, t, false);
  }
  return mask.finish();
}

IncompleteSample apply_mar_rank(const IncompleteSample& sample, std::size_t control,
                                std::span<const std::size_t> targets, double p, Rng& rng) {
  check_columns(targets, sample.dim(), "apply_mar_rank");
  const auto per = broadcast(p, targets, sample.dim());
  return apply_mar_rank(sample, control, targets, per, rng);
}

IncompleteSample apply_mar_logistic(const IncompleteSample& sample,
                                    std::span<const std::size_t> controls,
                                    std::span<const std::size_t> targets,
                                    const LogisticModel& model, Rng& rng) {
  require_complete(sample, "apply_mar_logistic");
  const std::size_t d = sample.dim();
  check_columns(controls, d, "apply_mar_logistic");
  check_columns(targets, d, "apply_mar_logistic");
  check_disjoint(controls, targets);
  const bool shared = model.slopes.size() == controls.size();
  const bool per_target = controls.size() == 1 && model.slopes.size() == targets.size();
  if (!shared && !per_target) {
    throw ParameterError("apply_mar_logistic: slopes must match controls (or targets, with one control)");
  }
  Mask mask(sample);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    double eta = model.intercept;
    if (shared) {
      for (std::size_t c = 0; c < controls.size(); ++c) {
        eta += model.slopes[c] * sample.value(i, controls[c]);
      }
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const double lin =
          shared ? eta : model.intercept + model.slopes[t] * sample.value(i, controls[0]);
      if (unif(rng) < logistic(lin)) mask.response.set(i, targets[t], false);
    }
  }
  return mask.finish();
}

IncompleteSample apply_missingness(const IncompleteSample& sample, const MissingnessSpec& spec,
                                   Rng& rng) {
  spec.validate(sample.dim());
  switch (spec.mechanism) {
  case Mechanism::mcar: return apply_mcar(sample, spec.probabilities, rng);
  case Mechanism::mar_1to9:
  case Mechanism::mar_rank: {
    const auto apply_one = [&](std::size_t control, std::span<const std::size_t> targets) {
      return spec.mechanism == Mechanism::mar_1to9
                 ? apply_mar_1to9(sample, control, targets, spec.probabilities, rng)
                 : apply_mar_rank(sample, control, targets, spec.probabilities, rng);
    };
    if (spec.controls.size() == 1) return apply_one(spec.controls.front(), spec.targets);
    // Paired form: controls[j] drives targets[j].
    Mask mask(sample);
    for (std::size_t j = 0; j < spec.targets.size(); ++j) {
      const std::size_t t = spec.targets[j];
      const auto part = apply_one(spec.controls[j], std::span(&spec.targets[j], 1));
      for (std::size_t i = 0; i < sample.rows(); ++i) {
        if (!part.observed(i, t)) mask.response.set(i, t, false);
      }
    }
    return mask.finish();
  }
  case Mechanism::mar_logistic:
    return apply_mar_logistic(sample, spec.controls, spec.targets, spec.logistic, rng);
  }
  return sample;
}

CovariateSampler standard_normal_covariates() {
  return [](Rng& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = normal(rng);
    return DataMatrix(rows, cols, std::move(v));
  };
}

double average_logistic_rate(double intercept, std::span<const double> slopes,
                             const DataMatrix& covariates) {
  if (covariates.cols() != slopes.size()) throw ShapeError("covariates/slopes width mismatch");
  if (covariates.rows() == 0) throw EmptyInputError("no covariate rows");
  double acc = 0.0;
  for (std::size_t i = 0; i < covariates.rows(); ++i) {
    double eta = intercept;
    const auto row = covariates.row(i);
    for (std::size_t c = 0; c < slopes.size(); ++c) eta += slopes[c] * row[c];
    acc += logistic(eta);
  }
  return acc / static_cast<double>(covariates.rows());
}

CalibrationResult calibrate_logistic_intercept(double target_rate, std::span<const double> slopes,
                                               const CovariateSampler& reference,
                                               std::size_t mc_size, double tol, Rng& rng) {
  if (!(target_rate > 0.001 && target_rate < 0.999)) {
    throw ParameterError("calibrate: target rate must lie in (0.001, 0.999)");
  }
  if (mc_size == 0) throw ParameterError("calibrate: mc_size must be positive");
  if (!(tol > 0.0)) throw ParameterError("calibrate: tolerance must be positive");
  const DataMatrix draws = reference(rng, mc_size, slopes.size());
  const auto rate = [&](double b0) { return average_logistic_rate(b0, slopes, draws); };

  double lo = -1.0;
  double hi = 1.0;
  std::size_t iter = 0;
  constexpr std::size_t kMaxIter = 200;
  while (rate(lo) > target_rate && iter < kMaxIter) {
    lo *= 2.0;
    ++iter;
  }
  while (rate(hi) < target_rate && iter < kMaxIter) {
    hi *= 2.0;
    ++iter;
  }
  while (iter < kMaxIter) {
    ++iter;
    const double mid = 0.5 * (lo + hi);
    const double r = rate(mid);
    if (std::abs(r - target_rate) <= tol) return {mid, r, iter};
    if (r < target_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw CalibrationError("calibrate: no convergence after 200 iterations");
}

double missing_rate(const IncompleteSample& sample, std::span<const std::size_t> columns) {
  std::vector<std::size_t> all;
  if (columns.empty()) {
    all.resize(sample.dim());
    std::iota(all.begin(), all.end(), std::size_t{0});
    columns = all;
  }
  if (sample.rows() == 0 || columns.empty()) return 0.0;
  std::size_t missing = 0;
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    for (auto k : columns) missing += sample.observed(i, k) ? 0 : 1;
  }
  return static_cast<double>(missing) / static_cast<double>(sample.rows() * columns.size());
}

} // namespace energy
