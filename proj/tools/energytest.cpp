// energytest: two-sample energy tests for incomplete data.
//
// Exit codes: 0 success, 2 usage or validation error, 3 numeric failure
// (including failed simulation cells), 1 anything else.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "energy/csv.hpp"
#include "energy/errors.hpp"
#include "energy/missingness.hpp"
#include "energy/resampling.hpp"
#include "energy/simharness.hpp"

namespace {

using nlohmann::json;
using namespace energy;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct TestArgs {
  std::string x;
  std::string y;
  std::string stat = "weighted";
  std::string imputer;
  std::size_t k = 6;
  std::string bootstrap;
  std::size_t B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string out = "text";
};

Procedure procedure_from(const TestArgs& a) {
  Procedure p;
  p.B = a.B;
  p.alpha = a.alpha;
  if (a.stat == "impute") {
    if (a.imputer.empty()) throw ParameterError("--stat impute needs --imputer");
    if (!a.bootstrap.empty() && a.bootstrap != "pooled") {
      throw ParameterError("--stat impute resamples the pooled sample; use --bootstrap pooled");
    }
    p.statistic = StatisticKind::imputed;
    p.algorithm = Algorithm::impute_bootstrap;
    p.imputer = ImputerSpec{imputer_kind_from_string(a.imputer), a.k};
  } else {
    if (!a.imputer.empty()) throw ParameterError("--imputer applies to --stat impute only");
    p.statistic = a.stat == "cc" ? StatisticKind::complete_case : StatisticKind::weighted;
    p.algorithm = a.bootstrap == "split" ? Algorithm::split_preserving : Algorithm::pooled;
  }
  p.validate();
  return p;
}

json outcome_json(const Procedure& p, const BootstrapOutcome& o, std::uint64_t seed) {
  json stat = {{"variant", std::string(to_string(o.observed.variant))},
               {"raw", o.observed.raw},
               {"scaled", o.observed.scaled},
               {"n", o.observed.n},
               {"m", o.observed.m}};
  if (o.observed.n_hat) {
    stat["n_hat"] = *o.observed.n_hat;
    stat["m_hat"] = *o.observed.m_hat;
  }
  return {{"kind", "energy_test"},
          {"procedure", p.id()},
          {"label", p.label()},
          {"statistic", stat},
          {"critical_value", o.critical_value},
          {"p_value", o.p_value},
          {"reject", o.reject},
          {"alpha", o.alpha},
          {"B", p.B},
          {"seed", seed}};
}

// Checks a document produced by `test --out json`.
void validate_test_json(const json& j) {
  const auto need = [&](const json& obj, const char* key, auto pred, const char* what) {
    if (!obj.contains(key) || !pred(obj.at(key))) {
      throw SchemaError(std::string("report: field '") + key + "' missing or not " + what);
    }
  };
  const auto is_num = [](const json& v) { return v.is_number(); };
  const auto is_str = [](const json& v) { return v.is_string(); };
  const auto is_uint = [](const json& v) { return v.is_number_unsigned(); };
  if (!j.is_object()) throw SchemaError("report: expected a JSON object");
  need(j, "kind", is_str, "a string");
  if (j.at("kind") != "energy_test") throw SchemaError("report: unsupported kind");
  need(j, "procedure", is_str, "a string");
  need(j, "label", is_str, "a string");
  need(j, "statistic", [](const json& v) { return v.is_object(); }, "an object");
  need(j, "critical_value", is_num, "a number");
  need(j, "p_value", is_num, "a number");
  need(j, "reject", [](const json& v) { return v.is_boolean(); }, "a boolean");
  need(j, "alpha", is_num, "a number");
  need(j, "B", is_uint, "an unsigned integer");
  need(j, "seed", is_uint, "an unsigned integer");
  const json& s = j.at("statistic");
  need(s, "variant", is_str, "a string");
  need(s, "raw", is_num, "a number");
  need(s, "scaled", is_num, "a number");
  need(s, "n", is_uint, "an unsigned integer");
  need(s, "m", is_uint, "an unsigned integer");
  Procedure::from_id(j.at("procedure").get<std::string>());
}

void print_test_text(std::ostream& out, const json& j) {
  const json& s = j.at("statistic");
  out << "procedure:      " << j.at("label").get<std::string>() << " ("
      << j.at("procedure").get<std::string>() << ")\n";
  out << "sizes:          n = " << s.at("n") << ", m = " << s.at("m");
  if (s.contains("n_hat")) out << " (complete: " << s.at("n_hat") << ", " << s.at("m_hat") << ")";
  out << '\n';
  out << "statistic:      " << format_double(s.at("raw").get<double>()) << '\n';
  out << "scaled:         " << format_double(s.at("scaled").get<double>()) << '\n';
  out << "critical value: " << format_double(j.at("critical_value").get<double>()) << '\n';
  out << "p-value:        " << format_double(j.at("p_value").get<double>()) << " (B = " << j.at("B")
      << ")\n";
  out << "decision:       " << (j.at("reject").get<bool>() ? "reject" : "do not reject")
      << " H0 at alpha = " << format_double(j.at("alpha").get<double>()) << '\n';
}

int cmd_test(const TestArgs& a) {
  const IncompleteSample x = read_sample_csv(a.x);
  const IncompleteSample y = read_sample_csv(a.y);
  if (x.dim() != y.dim()) {
    throw ShapeError("dimension mismatch: --x has " + std::to_string(x.dim()) +
                     " columns, --y has " + std::to_string(y.dim()));
  }
  const Procedure proc = procedure_from(a);
  Rng rng = child_rng(a.seed, 0);
  const BootstrapOutcome outcome = bootstrap_test(x, y, proc, rng);
  const json j = outcome_json(proc, outcome, a.seed);
  if (a.out == "json") {
    std::cout << j.dump(2) << '\n';
  } else {
    print_test_text(std::cout, j);
  }
  return 0;
}

struct SimulateArgs {
  std::string config;
  std::size_t jobs = 1;
  std::string out_dir;
  bool quiet = false;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path.string() + "'");
  out << text;
}

int cmd_simulate(const SimulateArgs& a) {
  const SweepConfig cfg = load_sweep_config(a.config);
  std::filesystem::create_directories(a.out_dir);
  if (!a.quiet) {
    std::cerr << cfg.name << ": " << cfg.cells.size() << " cells, N = " << cfg.replicates
              << ", jobs = " << a.jobs << '\n';
  }
  const SweepOutcome outcome = run_sweep(cfg, a.jobs, [&](const CellResult& c) {
    if (a.quiet) return;
    std::cerr << "  " << c.x_label << " vs " << c.y_label << ": "
              << (c.failed ? "FAILED (" + c.error + ")" : "done") << " in "
              << format_double(std::round(c.runtime_seconds * 10) / 10) << " s\n";
  });
  const std::filesystem::path dir(a.out_dir);
  write_file(dir / (cfg.name + ".csv"), emit_table(outcome.table, TableFormat::csv));
  write_file(dir / (cfg.name + ".md"), emit_table(outcome.table, TableFormat::markdown));
  write_file(dir / (cfg.name + ".manifest.json"), outcome.manifest_json + "\n");
  if (!a.quiet) std::cerr << "wrote " << (dir / cfg.name).string() << ".{csv,md,manifest.json}\n";
  if (outcome.failed_cells > 0) {
    std::cerr << outcome.failed_cells << " cell(s) failed; see the manifest\n";
    return kExitNumeric;
  }
  return 0;
}

struct CalibrateArgs {
  double rate = 0.0;
  std::vector<double> slopes;
  std::size_t mc = 200000;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  std::string out = "text";
};

int cmd_calibrate(const CalibrateArgs& a) {
  if (!(a.rate > 0.0 && a.rate < 1.0)) throw ParameterError("--rate must lie in (0, 1)");
  Rng rng = child_rng(a.seed, 0);
  const CalibrationResult r = calibrate_logistic_intercept(
      a.rate, a.slopes, standard_normal_covariates(), a.mc, a.tol, rng);
  if (a.out == "json") {
    std::cout << json{{"target_rate", a.rate},
                      {"slopes", a.slopes},
                      {"intercept", r.intercept},
                      {"achieved_rate", r.achieved_rate},
                      {"iterations", r.iterations},
                      {"mc", a.mc},
                      {"seed", a.seed}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "intercept:     " << format_double(r.intercept) << '\n'
              << "achieved rate: " << format_double(r.achieved_rate) << '\n';
  }
  return 0;
}

struct ReportArgs {
  std::string input;
  std::string format;
  bool rates = false;
  std::string title;
};

int cmd_report(const ReportArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw IngestionError("cannot open '" + a.input + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("report: invalid JSON: ") + e.what());
    }
    validate_test_json(j);
    if (a.format == "json") {
      std::cout << j.dump(2) << '\n';
    } else if (a.format.empty() || a.format == "text") {
      print_test_text(std::cout, j);
    } else {
      throw ParameterError("report: a test result renders as text or json");
    }
    return 0;
  }
  std::istringstream table_in(text);
  PowerTable table = parse_table_csv(table_in);
  table.show_rates = a.rates;
  table.title = a.title;
  if (a.format == "csv") {
    std::cout << emit_table(table, TableFormat::csv);
  } else if (a.format.empty() || a.format == "markdown") {
    std::cout << emit_table(table, TableFormat::markdown);
  } else {
    throw ParameterError("report: a table renders as markdown or csv");
  }
  return 0;
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("ENERGY_TEST_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid ENERGY_TEST_THREADS='" << env << "'\n";
  }
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample energy tests for data with missing values"};
  app.require_subcommand(1, 1);

  TestArgs test;
  auto* t = app.add_subcommand("test", "Test whether two samples (CSV files) share a law");
  t->add_option("--x", test.x, "CSV file with the first sample (NA or empty = missing)")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("--y", test.y, "CSV file with the second sample")->required()->check(CLI::ExistingFile);
  t->add_option("--stat", test.stat, "Statistic: cc, weighted or impute")
      ->check(CLI::IsMember({"cc", "weighted", "impute"}))
      ->capture_default_str();
  t->add_option("--imputer", test.imputer, "Imputer for --stat impute: mean, median or knn")
      ->check(CLI::IsMember({"mean", "median", "knn"}));
  t->add_option("--k", test.k, "Neighbours for the knn imputer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  t->add_option("--bootstrap", test.bootstrap,
                "Resampling: split (keeps complete-case counts) or pooled (default)")
      ->check(CLI::IsMember({"split", "pooled"}));
  t->add_option("--B", test.B, "Bootstrap replicates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  t->add_option("--alpha", test.alpha, "Significance level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  t->add_option("--seed", test.seed, "Random seed")->capture_default_str();
  t->add_option("--out", test.out, "Output format: text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  SimulateArgs sim;
  sim.jobs = default_jobs();
  auto* s = app.add_subcommand("simulate", "Run a power-table sweep from a scenario file");
  s->add_option("--config", sim.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  s->add_option("--jobs", sim.jobs, "Worker threads (default: $ENERGY_TEST_THREADS or 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--out-dir", sim.out_dir, "Directory for the tables and the run manifest")
      ->required();
  s->add_flag("--quiet", sim.quiet, "No progress output");

  CalibrateArgs cal;
  auto* c = app.add_subcommand(
      "calibrate", "Find the logistic intercept giving a target missing rate on N(0, I) covariates");
  c->add_option("--rate", cal.rate, "Target missing rate in (0, 1)")->required();
  c->add_option("--slopes", cal.slopes, "Slopes, comma separated (one per covariate)")
      ->required()
      ->delimiter(',');
  c->add_option("--mc", cal.mc, "Monte Carlo reference draws")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c->add_option("--seed", cal.seed, "Random seed")->capture_default_str();
  c->add_option("--tol", cal.tol, "Tolerance on the achieved rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c->add_option("--out", cal.out, "Output format: text or json")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Re-render a test result (JSON) or a power table (CSV)");
  r->add_option("input", rep.input, "JSON from `test --out json` or CSV from `simulate`")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_option("--format", rep.format, "text|json for results, markdown|csv for tables")
      ->check(CLI::IsMember({"text", "json", "markdown", "csv"}));
  r->add_flag("--rates", rep.rates, "Include the missing-rate row (logistic layout)");
  r->add_option("--title", rep.title, "Table title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*t) return cmd_test(test);
    if (*s) return cmd_simulate(sim);
    if (*c) return cmd_calibrate(cal);
    if (*r) return cmd_report(rep);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
