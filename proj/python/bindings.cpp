#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "energy/asymptotics.hpp"
#include "energy/distributions.hpp"
#include "energy/errors.hpp"
#include "energy/imputation.hpp"
#include "energy/missingness.hpp"
#include "energy/resampling.hpp"
#include "energy/simharness.hpp"
#include "energy/statistics.hpp"

namespace py = pybind11;
using namespace energy;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// NaN marks a missing cell.
IncompleteSample to_sample(Array a, const char* name) {
  if (a.ndim() == 1) {
    // A 1-D array is a univariate sample.
    const auto n = static_cast<std::size_t>(a.shape(0));
    return to_sample(a.reshape({static_cast<py::ssize_t>(n), py::ssize_t{1}}), name);
  }
  if (a.ndim() != 2) throw ShapeError(std::string(name) + ": expected a 1-D or 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  const double* p = a.data();
  DataMatrix values(rows, cols);
  ResponseMatrix response(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      const double v = p[i * cols + k];
      if (std::isnan(v)) {
        response.set(i, k, false);
      } else if (!std::isfinite(v)) {
        throw ParseError(std::string(name) + ": non-finite value at (" + std::to_string(i) + ", " +
                         std::to_string(k) + ")");
      } else {
        values(i, k) = v;
      }
    }
  }
  return {std::move(values), std::move(response)};
}

py::array_t<double> to_array(const IncompleteSample& s) {
  py::array_t<double> out({s.rows(), s.dim()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t k = 0; k < s.dim(); ++k) {
      w(i, k) = s.observed(i, k) ? s.value(i, k) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

py::array_t<double> to_array(const DataMatrix& m) { return to_array(IncompleteSample(m)); }

py::array_t<double> to_array(const DistanceMatrix& d) {
  py::array_t<double> out({d.rows(), d.cols()});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) w(i, j) = d(i, j);
  }
  return out;
}

DistanceKind distance_kind(const std::string& name) {
  if (name == "euclidean") return DistanceKind::euclidean;
  if (name == "truncated") return DistanceKind::truncated;
  if (name == "weighted") return DistanceKind::weighted;
  throw ParameterError("unknown distance '" + name + "' (euclidean, truncated, weighted)");
}

py::dict statistic_dict(const StatisticValue& v) {
  py::dict d;
  d["variant"] = std::string(to_string(v.variant));
  d["raw"] = v.raw;
  d["scaled"] = v.scaled;
  d["n"] = v.n;
  d["m"] = v.m;
  d["n_hat"] = v.n_hat;
  d["m_hat"] = v.m_hat;
  return d;
}

py::dict statistic(const Array& x, const Array& y, const std::string& variant) {
  const auto a = to_sample(x, "x");
  const auto b = to_sample(y, "y");
  if (variant == "classic") return statistic_dict(energy_statistic(a, b));
  if (variant == "cc") return statistic_dict(cc_statistic(a, b));
  if (variant == "weighted") return statistic_dict(weighted_statistic(a, b));
  throw ParameterError("unknown statistic '" + variant + "' (classic, cc, weighted)");
}

py::dict test(const Array& x, const Array& y, const std::string& procedure, std::size_t B,
              double alpha, std::size_t k, std::uint64_t seed) {
  const auto a = to_sample(x, "x");
  const auto b = to_sample(y, "y");
  if (a.dim() != b.dim()) throw ShapeError("x and y differ in column count");
  const Procedure proc = Procedure::from_id(procedure, B, alpha, k);
  BootstrapOutcome out;
  {
    py::gil_scoped_release release;
    Rng rng = child_rng(seed, 0);
    out = bootstrap_test(a, b, proc, rng);
  }
  py::dict d;
  d["procedure"] = proc.id();
  d["label"] = proc.label();
  d["statistic"] = statistic_dict(out.observed);
  d["critical_value"] = out.critical_value;
  d["p_value"] = out.p_value;
  d["reject"] = out.reject;
  d["alpha"] = out.alpha;
  d["B"] = B;
  d["seed"] = seed;
  d["replicates"] = py::array_t<double>(out.replicates.size(), out.replicates.data());
  return d;
}

py::array_t<double> missingness(const Array& x, const std::string& mechanism, py::object p,
                                std::optional<std::vector<std::size_t>> controls,
                                std::optional<std::vector<std::size_t>> targets,
                                std::optional<double> intercept,
                                std::optional<std::vector<double>> slopes, std::uint64_t seed) {
  const auto s = to_sample(x, "x");
  const std::size_t d = s.dim();
  MissingnessSpec spec;
  spec.mechanism = mechanism_from_string(mechanism);
  if (spec.mechanism != Mechanism::mcar) {
    spec.controls = controls.value_or(std::vector<std::size_t>{0});
    if (targets) {
      spec.targets = *targets;
    } else {
      for (std::size_t k = 0; k < d; ++k) {
        if (std::find(spec.controls.begin(), spec.controls.end(), k) == spec.controls.end()) {
          spec.targets.push_back(k);
        }
      }
    }
  } else if (controls || targets) {
    throw ParameterError("mcar takes neither controls nor targets");
  }
  if (spec.mechanism == Mechanism::mar_logistic) {
    if (!intercept || !slopes) throw ParameterError("mar_logistic needs intercept and slopes");
    spec.logistic.intercept = *intercept;
    spec.logistic.slopes = *slopes;
  } else {
    if (p.is_none()) throw ParameterError(mechanism + " needs p");
    if (py::isinstance<py::float_>(p) || py::isinstance<py::int_>(p)) {
      const double v = p.cast<double>();
      spec.probabilities.assign(d, spec.mechanism == Mechanism::mcar ? v : 0.0);
      for (auto t : spec.targets) {
        if (t < d) spec.probabilities[t] = v;
      }
    } else {
      spec.probabilities = p.cast<std::vector<double>>();
    }
  }
  Rng rng = child_rng(seed, 0);
  return to_array(apply_missingness(s, spec, rng));
}

py::array_t<double> draw(const std::string& name, std::size_t n, std::size_t dim,
                         std::uint64_t seed) {
  const auto dgp = presets::by_name(name, dim);
  if (!dgp) throw ParameterError("unknown distribution '" + name + "' for dim " + std::to_string(dim));
  Rng rng = child_rng(seed, 0);
  return to_array(sample(*dgp, n, rng));
}

py::dict calibrate(double rate, const std::vector<double>& slopes, std::size_t mc, double tol,
                   std::uint64_t seed) {
  if (!(rate > 0.0 && rate < 1.0)) throw ParameterError("rate must lie in (0, 1)");
  Rng rng = child_rng(seed, 0);
  const auto r = calibrate_logistic_intercept(rate, slopes, standard_normal_covariates(), mc, tol, rng);
  py::dict d;
  d["intercept"] = r.intercept;
  d["achieved_rate"] = r.achieved_rate;
  d["iterations"] = r.iterations;
  return d;
}

py::dict simulate(const std::string& config_json, std::size_t jobs, const std::string& base_dir) {
  const SweepConfig cfg = parse_sweep_config(config_json, base_dir);
  SweepOutcome out;
  {
    py::gil_scoped_release release;
    out = run_sweep(cfg, jobs);
  }
  py::dict d;
  d["csv"] = emit_table(out.table, TableFormat::csv);
  d["markdown"] = emit_table(out.table, TableFormat::markdown);
  d["manifest"] = out.manifest_json;
  d["failed_cells"] = out.failed_cells;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-distance two-sample tests for incomplete data (NaN marks a missing value).";

  auto base = py::register_exception<Error>(m, "EnergyError", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NoCompleteCasesError>(m, "NoCompleteCasesError", validation.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("statistic", &statistic, py::arg("x"), py::arg("y"), py::arg("variant") = "weighted",
        "Energy statistic: variant is 'classic', 'cc' or 'weighted'.");
  m.def("test", &test, py::arg("x"), py::arg("y"), py::arg("procedure") = "alg2_w",
        py::arg("B") = 1000, py::arg("alpha") = 0.05, py::arg("k") = 6, py::arg("seed") = 1,
        "Bootstrap test; matches `energytest test` for the same seed.");
  m.def(
      "distance",
      [](Array u, Array v, const std::string& kind) {
        const auto a = to_sample(u.reshape({py::ssize_t{1}, u.size()}), "u");
        const auto b = to_sample(v.reshape({py::ssize_t{1}, v.size()}), "v");
        return pairwise_matrix(a, b, distance_kind(kind))(0, 0);
      },
      py::arg("u"), py::arg("v"), py::arg("kind") = "weighted");
  m.def(
      "pairwise",
      [](const Array& x, std::optional<Array> y, const std::string& kind) {
        const auto a = to_sample(x, "x");
        if (!y) return to_array(pairwise_matrix(a, distance_kind(kind)));
        return to_array(pairwise_matrix(a, to_sample(*y, "y"), distance_kind(kind)));
      },
      py::arg("x"), py::arg("y") = py::none(), py::arg("kind") = "weighted");
  m.def(
      "impute",
      [](const Array& x, const std::string& method, std::size_t k) {
        ImputerSpec spec;
        spec.kind = imputer_kind_from_string(method);
        spec.k = k;
        return to_array(impute(to_sample(x, "x"), spec));
      },
      py::arg("x"), py::arg("method") = "mean", py::arg("k") = 6);
  m.def("apply_missingness", &missingness, py::arg("x"), py::arg("mechanism"),
        py::arg("p") = py::none(), py::arg("controls") = py::none(),
        py::arg("targets") = py::none(), py::arg("intercept") = py::none(),
        py::arg("slopes") = py::none(), py::arg("seed") = 1);
  m.def("sample", &draw, py::arg("name"), py::arg("n"), py::arg("dim") = 3, py::arg("seed") = 1,
        "IID rows from a preset such as 'N(m1,C1)' or 't5(0,I)'.");
  m.def("calibrate", &calibrate, py::arg("rate"), py::arg("slopes"), py::arg("mc") = 200000,
        py::arg("tol") = 1e-6, py::arg("seed") = 1);
  m.def(
      "integral_oracle",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return integral_oracle_1d(x, y);
      },
      py::arg("x"), py::arg("y"), "Univariate statistic via the characteristic-function integral.");
  m.def("simulate", &simulate, py::arg("config"), py::arg("jobs") = 1, py::arg("base_dir") = ".",
        "Runs a scenario document (JSON text); returns csv, markdown and manifest strings.");
  m.def("procedures", [] {
    std::vector<std::string> ids;
    for (const auto& p : studied_procedures()) ids.push_back(p.id());
    return ids;
  });
}
