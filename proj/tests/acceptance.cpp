// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,3,6] [--jobs N]
//
// Exit status 0 when every selected criterion passes, 1 on any failure and
// 77 when every selected criterion was skipped (missing wine data).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "energy/asymptotics.hpp"
#include "energy/distributions.hpp"
#include "energy/missingness.hpp"
#include "energy/resampling.hpp"
#include "energy/simharness.hpp"
#include "energy/statistics.hpp"

using namespace energy;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

std::size_t g_jobs = 1;

DataMatrix normal_rows(Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  DataMatrix out(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) out(i, k) = z(rng);
  return out;
}

IncompleteSample masked(Rng& rng, std::size_t n, std::size_t d, double observe_prob) {
  DataMatrix v = normal_rows(rng, n, d);
  ResponseMatrix r(n, d);
  std::bernoulli_distribution keep(observe_prob);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) r.set(i, k, keep(rng));
  return {std::move(v), std::move(r)};
}

MissingnessSpec mcar(double p, std::size_t d = 3) {
  MissingnessSpec s;
  s.mechanism = Mechanism::mcar;
  s.probabilities.assign(d, p);
  return s;
}

CellResult trivariate_cell(const std::string& x, const std::string& y, double p, std::uint64_t seed,
                           std::size_t replicates = 2000) {
  ScenarioSpec spec;
  spec.x = DataSource::from_dgp(*presets::by_name(x, 3));
  spec.y = DataSource::from_dgp(*presets::by_name(y, 3));
  spec.missingness_x = mcar(p);
  spec.missingness_y = mcar(p);
  spec.procedures = studied_procedures(1);
  spec.replicates = replicates;
  spec.seed = seed;
  return run_cell(spec, g_jobs);
}

std::string percents(const CellResult& c) {
  std::ostringstream out;
  for (std::size_t s = 0; s < 7; ++s) {
    out << (s ? " " : "") << legend_slot_name(s) << "=" << (c.percent[s] ? *c.percent[s] : -1.0);
  }
  return out.str();
}

bool in_range(const std::optional<double>& v, double lo, double hi) {
  return v && *v >= lo && *v <= hi;
}

Outcome degeneracy() {
  Rng rng = child_rng(1001, 0);
  std::uniform_int_distribution<std::size_t> size(1, 50);
  const std::size_t dims[] = {1, 3, 10};
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = dims[rep % 3];
    const IncompleteSample x(normal_rows(rng, size(rng), d));
    const IncompleteSample y(normal_rows(rng, size(rng), d, 1.3));
    const double t = energy_statistic(x, y).raw;
    const double cc = cc_statistic(x, y).raw;
    const double w = weighted_statistic(x, y).raw;
    if (t != cc || t != w) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "pair " << rep << ": T=" << t << " T_CC=" << cc << " T_W=" << w;
      return {Verdict::fail, msg.str()};
    }
  }
  return {Verdict::pass, "100 pairs bit-identical"};
}

Outcome kernel_oracle() {
  Rng rng = child_rng(1002, 0);
  std::uniform_int_distribution<std::size_t> size(1, 5);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 1 + rep % 4;
    const auto x = masked(rng, size(rng), d, 0.7);
    const auto y = masked(rng, size(rng), d, 0.7);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t i2 = 0; i2 < x.rows(); ++i2)
        for (std::size_t j = 0; j < y.rows(); ++j)
          for (std::size_t j2 = 0; j2 < y.rows(); ++j2)
            sum += h_w_kernel(case_of(x, i), case_of(x, i2), case_of(y, j), case_of(y, j2));
    const double n = static_cast<double>(x.rows()), m = static_cast<double>(y.rows());
    const double brute = sum / (n * n * m * m);
    const double direct = weighted_statistic(x, y).raw;
    const double scale = std::max(std::abs(brute), std::abs(direct));
    if (scale > 0.0) worst = std::max(worst, std::abs(brute - direct) / scale);
  }
  std::ostringstream msg;
  msg << "max relative error " << worst << " over 200 pairs";
  return {worst <= 1e-12 ? Verdict::pass : Verdict::fail, msg.str()};
}

Outcome ecf_oracle() {
  Rng rng = child_rng(1003, 0);
  std::uniform_int_distribution<std::size_t> size(1, 20);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = normal_rows(rng, size(rng), 1);
    const auto y = normal_rows(rng, size(rng), 1, 2.0);
    const double direct = energy_statistic(x, y).raw;
    const double oracle = integral_oracle_1d(x, y);
    worst = std::max(worst, std::abs(direct - oracle) / std::abs(direct));
  }
  std::ostringstream msg;
  msg << "max relative error " << worst << " over 50 pairs";
  return {worst <= 1e-3 ? Verdict::pass : Verdict::fail, msg.str()};
}

Outcome mean_identity() {
  const CaseSampler sampler = [](Rng& rng, std::size_t rows) { return masked(rng, rows, 3, 0.8); };
  const auto c = null_mean_identity_check(sampler, 10, 10, 20000, 1004, StatisticVariant::weighted);
  const double gap = std::abs(c.mc_mean - c.eta_hat);
  std::ostringstream msg;
  msg << "mean " << c.mc_mean << ", eta " << c.eta_hat << ", |diff| " << gap << ", 3 SE "
      << 3.0 * c.se;
  return {gap <= 3.0 * c.se ? Verdict::pass : Verdict::fail, msg.str()};
}

Outcome covariance_kernel() {
  const Dgp dgp = normal_dgp({0.0}, SquareMatrix::identity(1));
  const std::vector<std::vector<double>> grid{{0.5}, {1.0}, {2.0}};
  std::ostringstream msg;
  bool ok = true;
  for (double q : {1.0, 0.5}) {
    const auto c = empirical_process_check(dgp, q, grid, 500, 5000, 1005, g_jobs);
    msg << (q == 1.0 ? "" : ", ") << "q=" << q << " max deviation " << c.max_deviation;
    ok = ok && c.max_deviation <= 0.05;
  }
  return {ok ? Verdict::pass : Verdict::fail, msg.str()};
}

// Run at N = 5000: at N = 2000 the warp-speed estimate has a standard
// deviation near 0.7 pp, so 42 entries against a +-2 pp band fail on a
// sizeable share of seeds even without any bias.
Outcome type_one_error() {
  const char* names[] = {"N(0,I)", "N(0,C1)", "N(m1,C1)", "N(0,C2)", "N(m1,C2)", "t5(0,I)"};
  std::ostringstream msg;
  bool ok = true;
  std::uint64_t k = 0;
  double lo = 100.0, hi = 0.0;
  for (const char* name : names) {
    const auto c = trivariate_cell(name, name, 0.1, derive_seed(1006, k++), 5000);
    bool cell_ok = !c.failed;
    for (std::size_t s = 0; s < 7; ++s) {
      cell_ok = cell_ok && in_range(c.percent[s], 3.0, 7.0);
      if (c.percent[s]) {
        lo = std::min(lo, *c.percent[s]);
        hi = std::max(hi, *c.percent[s]);
      }
    }
    if (!cell_ok) msg << name << ": " << (c.failed ? c.error : percents(c)) << "; ";
    ok = ok && cell_ok;
  }
  if (ok) msg << "N=5000, 6 null cells x 7 procedures, rates " << lo << "% to " << hi << "%";
  return {ok ? Verdict::pass : Verdict::fail, msg.str()};
}

Outcome power_ordering() {
  const auto c = trivariate_cell("N(0,I)", "N(0,C1)", 0.4, 1007);
  if (c.failed) return {Verdict::fail, c.error};
  const bool ok = in_range(c.percent[2], 15.0, 30.0) && in_range(c.percent[0], 2.0, 9.0);
  std::ostringstream msg;
  msg << "alg1_w " << *c.percent[2] << "% (want 15-30), alg1_cc " << *c.percent[0]
      << "% (want 2-9)";
  return {ok ? Verdict::pass : Verdict::fail, msg.str()};
}

Outcome high_power() {
  const auto c = trivariate_cell("N(0,I)", "N(m1,C1)", 0.1, 1008);
  if (c.failed) return {Verdict::fail, c.error};
  bool ok = true;
  for (std::size_t s = 0; s < 4; ++s) ok = ok && in_range(c.percent[s], 95.0, 100.0);
  return {ok ? Verdict::pass : Verdict::fail, percents(c)};
}

Outcome calibration() {
  struct Case {
    double target;
    std::vector<double> slopes;
  };
  const Case cases[] = {{0.10, {-1.9, -1.5}}, {0.37, {-1.7, -0.6}}};
  Rng rng = child_rng(1009, 0);
  Rng fresh = child_rng(1009, 1);
  const DataMatrix reference = standard_normal_covariates()(fresh, 1000000, 2);
  std::ostringstream msg;
  bool ok = true;
  for (const auto& c : cases) {
    const auto r = calibrate_logistic_intercept(c.target, c.slopes, standard_normal_covariates(),
                                                200000, 1e-6, rng);
    const double achieved = average_logistic_rate(r.intercept, c.slopes, reference);
    msg << "target " << c.target << ": intercept " << r.intercept << ", rate " << achieved << "; ";
    ok = ok && std::abs(achieved - c.target) <= 0.01;
  }
  return {ok ? Verdict::pass : Verdict::fail, msg.str()};
}

std::optional<fs::path> wine_dir() {
  for (const char* var : {"ENERGY_WINE_DIR", "ENERGY_DATA_DIR"}) {
    if (const char* v = std::getenv(var)) {
      const fs::path p(v);
      if (fs::exists(p / "winequality-white.csv") && fs::exists(p / "winequality-red.csv")) return p;
    }
  }
  return std::nullopt;
}

Outcome wine_study() {
  const auto dir = wine_dir();
  if (!dir) {
    return {Verdict::skip,
            "winequality-white.csv / winequality-red.csv not found in $ENERGY_WINE_DIR or "
            "$ENERGY_DATA_DIR"};
  }
  const PopulationSource white{*dir / "winequality-white.csv", {"pH", "sulphates", "alcohol"}, "white"};
  const PopulationSource red{*dir / "winequality-red.csv", {"pH", "sulphates", "alcohol"}, "red"};
  std::ostringstream msg;
  bool ok = true;
  const auto null_ok = [](const CellResult& c) {
    bool good = !c.failed;
    for (std::size_t s = 0; s < 7; ++s) {
      const double widen = s == 6 ? 5.0 : 0.0;
      good = good && in_range(c.percent[s], 3.0 - widen, 8.0 + widen);
    }
    return good;
  };
  for (double p : {0.1, 0.4}) {
    WineStudyOptions opt;
    opt.missingness = mcar(p);
    opt.procedures = studied_procedures(1);
    opt.replicates = 2000;
    opt.seed = p < 0.2 ? 1010 : 1011;
    opt.jobs = g_jobs;
    const PowerTable table = run_wine_study(white, red, opt);
    const CellResult* ww = table.find("White", "White");
    const bool w_ok = ww && null_ok(*ww);
    msg << "p=" << p << " white/white " << (w_ok ? "ok" : percents(*ww)) << "; ";
    ok = ok && w_ok;
    if (p > 0.2) {
      const CellResult* wr = table.find("White", "Red");
      const bool r_ok = wr && !wr->failed && in_range(wr->percent[2], 28.0, 44.0) &&
                        in_range(wr->percent[0], 3.0, 10.0);
      msg << "white/red alg1_w " << (wr->percent[2] ? *wr->percent[2] : -1.0) << "% (want 28-44), alg1_cc "
          << (wr->percent[0] ? *wr->percent[0] : -1.0) << "% (want 3-10)";
      ok = ok && r_ok;
    }
  }
  return {ok ? Verdict::pass : Verdict::fail, msg.str()};
}

Outcome resampler_laws() {
  Rng rng = child_rng(1011, 0);
  const auto x = masked(rng, 7, 2, 0.7);
  const auto y = masked(rng, 5, 2, 0.7);
  const std::size_t nh = x.complete_count(), mh = y.complete_count();
  for (int rep = 0; rep < 10000; ++rep) {
    const auto [a, b] = resample_split_preserving(x, y, rng);
    if (a.complete_count() != nh || b.complete_count() != mh) {
      return {Verdict::fail, "split-preserving draw " + std::to_string(rep) + " changed the counts"};
    }
  }

  // Pooled: complete-case count of x* against the exact hypergeometric law.
  const std::size_t n = x.rows(), total = n + y.rows(), k_total = nh + mh;
  const auto choose = [](std::size_t a, std::size_t b) {
    if (b > a) return 0.0;
    double r = 1.0;
    for (std::size_t i = 1; i <= b; ++i) r = r * static_cast<double>(a - b + i) / static_cast<double>(i);
    return r;
  };
  const int draws = 10000;
  std::vector<int> counts(n + 1, 0);
  for (int rep = 0; rep < draws; ++rep) ++counts[resample_pooled(x, y, rng).first.complete_count()];
  // Pool cells with small expectation into their neighbours.
  std::vector<double> obs, expct;
  double acc_o = 0.0, acc_e = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    acc_o += counts[k];
    acc_e += draws * choose(k_total, k) * choose(total - k_total, n - k) / choose(total, n);
    if (acc_e >= 5.0) {
      obs.push_back(acc_o);
      expct.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (expct.empty()) return {Verdict::fail, "degenerate hypergeometric law"};
    obs.back() += acc_o;
    expct.back() += acc_e;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) chi2 += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
  const std::size_t df = obs.size() - 1;
  // Upper 0.01 quantiles of chi-square, df = 1..8.
  const double crit[] = {6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090};
  if (df == 0 || df > 8) return {Verdict::fail, "unexpected number of chi-square cells"};
  std::ostringstream msg;
  msg << "n=" << n << " m=" << y.rows() << " complete " << nh << "+" << mh << "; chi2 " << chi2
      << " on " << df << " df (crit " << crit[df - 1] << ")";
  return {chi2 < crit[df - 1] ? Verdict::pass : Verdict::fail, msg.str()};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Criteria to run (comma separated)")->delimiter(',');
  app.add_option("--jobs", g_jobs, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "degeneracy identity", degeneracy},
      {2, "brute-force kernel oracle", kernel_oracle},
      {3, "ECF integral oracle", ecf_oracle},
      {4, "exact mean identity", mean_identity},
      {5, "covariance kernel", covariance_kernel},
      {6, "type I error, MCAR 0.1", type_one_error},
      {7, "power ordering, MCAR 0.4", power_ordering},
      {8, "high-power cell", high_power},
      {9, "MAR-logistic calibration", calibration},
      {10, "wine study", wine_study},
      {11, "resampler laws", resampler_laws},
  };

  int failed = 0, passed = 0, skipped = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << c.id << " (" << c.title << "): " << tag << " [" << std::fixed
              << std::setprecision(1) << secs << " s] " << std::defaultfloat << o.detail << std::endl;
    (o.verdict == Verdict::pass ? passed : o.verdict == Verdict::fail ? failed : skipped)++;
  }
  if (failed > 0) return 1;
  if (passed == 0 && skipped > 0) return 77;
  return 0;
}
