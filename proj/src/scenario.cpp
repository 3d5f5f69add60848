#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "energy/errors.hpp"
#include "energy/parallel.hpp"
#include "energy/simharness.hpp"

namespace energy {

namespace {

using nlohmann::json;

// A JSON value together with its location in the document, for messages.
class Node {
public:
  Node(const json& value, std::string path) : v_(value), path_(std::move(path)) {}

  const json& value() const { return v_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("scenario " + (path_.empty() ? std::string("/") : path_) + ": " + what);
  }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!v_.is_object()) fail("expected an object");
    for (const auto& [key, _] : v_.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) Node(v_[key], path_ + "/" + key).fail("unknown key");
    }
  }

  bool has(const char* key) const { return v_.contains(key); }
  Node at(const char* key) const {
    if (!v_.contains(key)) Node(v_, path_ + "/" + key).fail("required key is missing");
    return {v_.at(key), path_ + "/" + key};
  }
  Node at(std::size_t i) const { return {v_.at(i), path_ + "/" + std::to_string(i)}; }
  std::size_t size() const { return v_.size(); }

  std::string str() const {
    if (!v_.is_string()) fail("expected a string");
    return v_.get<std::string>();
  }
  double num() const {
    if (!v_.is_number()) fail("expected a number");
    return v_.get<double>();
  }
  std::uint64_t u64() const {
    if (!v_.is_number_unsigned() && !(v_.is_number_integer() && v_.get<std::int64_t>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return v_.get<std::uint64_t>();
  }
  std::vector<double> numbers() const {
    if (!v_.is_array()) fail("expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).num());
    return out;
  }
  std::vector<std::size_t> indices() const {
    if (!v_.is_array()) fail("expected an array of column indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).u64());
    return out;
  }

private:
  const json& v_;
  std::string path_;
};

template <typename F>
auto guarded(const Node& node, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const ValidationError& e) {
    node.fail(e.what());
  }
}

std::vector<double> parse_mean(const Node& node, std::size_t dim) {
  if (node.value().is_string()) {
    auto mu = presets::mean(node.str(), dim);
    if (!mu) node.fail("unknown mean alias '" + node.str() + "'");
    return *mu;
  }
  return node.numbers();
}

SquareMatrix parse_covariance(const Node& node, std::size_t dim) {
  if (node.value().is_string()) {
    auto cov = presets::covariance(node.str(), dim);
    if (!cov) node.fail("unknown covariance alias '" + node.str() + "' at dimension " +
                        std::to_string(dim));
    return *cov;
  }
  if (!node.value().is_array()) node.fail("expected an alias or a matrix");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < node.size(); ++i) rows.push_back(node.at(i).numbers());
  return guarded(node, [&] { return SquareMatrix::from_rows(rows); });
}

DataSource parse_distribution(const Node& node, std::size_t dim) {
  if (node.value().is_string()) {
    auto dgp = presets::by_name(node.str(), dim);
    if (!dgp) node.fail("unknown distribution '" + node.str() + "'");
    return DataSource::from_dgp(std::move(*dgp));
  }
  node.require_object({"label", "family", "mean", "covariance", "df"});
  const std::string family = node.at("family").str();
  const std::string label = node.at("label").str();
  auto mean = parse_mean(node.at("mean"), dim);
  auto cov = parse_covariance(node.at("covariance"), dim);
  Dgp dgp;
  if (family == "normal") {
    if (node.has("df")) node.at("df").fail("only the t family takes df");
    dgp = normal_dgp(std::move(mean), std::move(cov), label);
  } else if (family == "t") {
    dgp = t_dgp(node.at("df").num(), std::move(mean), std::move(cov), label);
  } else {
    node.at("family").fail("expected \"normal\" or \"t\"");
  }
  guarded(node, [&] { dgp.validate(); });
  if (dgp.dim() != dim) node.fail("dimension differs from /dim");
  return DataSource::from_dgp(std::move(dgp));
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.is_absolute()) return p;
  const auto local = base / p;
  if (std::filesystem::exists(local)) return local;
  if (const char* dir = std::getenv("ENERGY_DATA_DIR")) {
    const auto alt = std::filesystem::path(dir) / p;
    if (std::filesystem::exists(alt)) return alt;
    const auto flat = std::filesystem::path(dir) / p.filename();
    if (std::filesystem::exists(flat)) return flat;
  }
  return local;
}

DataSource parse_population_entry(const Node& node, const std::filesystem::path& base) {
  node.require_object({"label", "path", "columns"});
  PopulationSource src;
  src.role = node.at("label").str();
  src.path = resolve(node.at("path").str(), base);
  if (node.has("columns")) {
    const Node cols = node.at("columns");
    if (!cols.value().is_array() || cols.size() == 0) cols.fail("expected a non-empty array");
    src.columns.clear();
    for (std::size_t i = 0; i < cols.size(); ++i) src.columns.push_back(cols.at(i).str());
  }
  return guarded(node, [&] { return DataSource::from_population(src.role, load_population(src)); });
}

MissingnessSpec parse_missingness(const Node& node, std::size_t dim) {
  node.require_object({"mechanism", "p", "controls", "targets", "intercept", "slopes"});
  MissingnessSpec spec;
  spec.mechanism = guarded(node.at("mechanism"),
                           [&] { return mechanism_from_string(node.at("mechanism").str()); });
  const bool mar = spec.mechanism != Mechanism::mcar;
  if (mar) {
    if (node.has("controls")) {
      spec.controls = node.at("controls").indices();
    } else if (spec.mechanism == Mechanism::mar_logistic) {
      node.at("controls");  // required
    } else {
      spec.controls = {0};
    }
    if (node.has("targets")) {
      spec.targets = node.at("targets").indices();
    } else {
      for (std::size_t k = 0; k < dim; ++k) {
        if (std::find(spec.controls.begin(), spec.controls.end(), k) == spec.controls.end()) {
          spec.targets.push_back(k);
        }
      }
    }
  } else if (node.has("controls") || node.has("targets")) {
    node.fail("mcar takes neither controls nor targets");
  }

  if (spec.mechanism == Mechanism::mar_logistic) {
    if (node.has("p")) node.at("p").fail("mar_logistic is set through intercept and slopes");
    spec.logistic.intercept = node.at("intercept").num();
    spec.logistic.slopes = node.at("slopes").numbers();
  } else {
    if (node.has("intercept") || node.has("slopes")) {
      node.fail("intercept and slopes apply to mar_logistic only");
    }
    const Node p = node.at("p");
    if (p.value().is_number()) {
      spec.probabilities.assign(dim, mar ? 0.0 : p.num());
      for (auto k : spec.targets) {
        if (k < dim) spec.probabilities[k] = p.num();
      }
    } else {
      spec.probabilities = p.numbers();
    }
  }
  guarded(node, [&] { spec.validate(dim); });
  return spec;
}

} // namespace

SweepConfig parse_sweep_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario: invalid JSON: ") + e.what());
  }
  const Node root(doc, "");
  root.require_object({"name", "title", "dim", "n", "m", "replicates", "alpha", "seed", "knn_k",
                       "procedures", "distributions", "populations", "cells", "missingness",
                       "missingness_y"});
  SweepConfig cfg;
  cfg.config_hash = fnv1a64(doc.dump());
  cfg.name = root.at("name").str();
  if (root.has("title")) cfg.title = root.at("title").str();
  if (root.has("n")) cfg.n = root.at("n").u64();
  if (root.has("m")) cfg.m = root.at("m").u64();
  if (cfg.n < 2) root.at("n").fail("must be >= 2");
  if (cfg.m < 2) root.at("m").fail("must be >= 2");
  if (root.has("replicates")) cfg.replicates = root.at("replicates").u64();
  if (cfg.replicates < 100) root.at("replicates").fail("must be >= 100");
  if (root.has("alpha")) cfg.alpha = root.at("alpha").num();
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) root.at("alpha").fail("must lie in (0, 1)");
  if (root.has("seed")) cfg.seed = root.at("seed").u64();
  std::size_t knn_k = 6;
  if (root.has("knn_k")) knn_k = root.at("knn_k").u64();

  if (root.has("distributions") == root.has("populations")) {
    root.fail("exactly one of \"distributions\" and \"populations\" is required");
  }
  std::size_t dim = 3;
  if (root.has("dim")) dim = root.at("dim").u64();
  if (dim == 0) root.at("dim").fail("must be >= 1");
  if (root.has("distributions")) {
    const Node list = root.at("distributions");
    if (!list.value().is_array() || list.size() == 0) list.fail("expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.sources.push_back(parse_distribution(list.at(i), dim));
    }
  } else {
    const Node list = root.at("populations");
    if (!list.value().is_array() || list.size() == 0) list.fail("expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.sources.push_back(parse_population_entry(list.at(i), base_dir));
    }
    dim = cfg.sources.front().dim();
    for (const auto& s : cfg.sources) {
      if (s.dim() != dim) list.fail("populations differ in column count");
    }
  }
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.sources[i].label() == cfg.sources[j].label()) {
        root.fail("duplicate distribution label '" + cfg.sources[i].label() + "'");
      }
    }
  }

  const std::size_t S = cfg.sources.size();
  const auto index_of = [&](const Node& node) {
    const std::string label = node.str();
    for (std::size_t i = 0; i < S; ++i) {
      if (cfg.sources[i].label() == label) return i;
    }
    node.fail("no distribution labelled '" + label + "'");
  };
  const std::string which =
      root.has("cells") && root.at("cells").value().is_string() ? root.at("cells").str() : "";
  if (!root.has("cells") || which == "all") {
    for (std::size_t i = 0; i < S; ++i) {
      for (std::size_t j = 0; j < S; ++j) cfg.cells.emplace_back(i, j);
    }
  } else if (which == "diagonal") {
    for (std::size_t i = 0; i < S; ++i) cfg.cells.emplace_back(i, i);
  } else if (which == "first_row") {
    for (std::size_t j = 0; j < S; ++j) cfg.cells.emplace_back(0, j);
  } else if (!which.empty()) {
    root.at("cells").fail("expected \"all\", \"diagonal\", \"first_row\" or a list of pairs");
  } else {
    const Node list = root.at("cells");
    if (!list.value().is_array()) list.fail("expected a list of [x, y] label pairs");
    for (std::size_t c = 0; c < list.size(); ++c) {
      const Node pair = list.at(c);
      if (!pair.value().is_array() || pair.size() != 2) pair.fail("expected [x, y]");
      cfg.cells.emplace_back(index_of(pair.at(std::size_t{0})), index_of(pair.at(1)));
    }
  }
  if (cfg.cells.empty()) root.at("cells").fail("no cells selected");

  if (root.has("missingness")) {
    cfg.missingness_x = parse_missingness(root.at("missingness"), dim);
  } else {
    cfg.missingness_x.probabilities.assign(dim, 0.0);
  }
  cfg.missingness_y = root.has("missingness_y")
                          ? parse_missingness(root.at("missingness_y"), dim)
                          : cfg.missingness_x;

  if (root.has("procedures")) {
    const Node list = root.at("procedures");
    if (!list.value().is_array()) list.fail("expected an array of procedure ids");
    if (list.size() == 0) list.fail("at least one procedure is required");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node item = list.at(i);
      cfg.procedures.push_back(
          guarded(item, [&] { return Procedure::from_id(item.str(), 1, cfg.alpha, knn_k); }));
    }
  } else {
    cfg.procedures = studied_procedures(1, cfg.alpha, knn_k);
  }
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_sweep_config(text.str(), path.parent_path());
}

SweepOutcome run_sweep(const SweepConfig& config, std::size_t jobs, const CellCallback& on_cell) {
  const std::size_t C = config.cells.size();
  jobs = std::max<std::size_t>(jobs, 1);
  const std::size_t outer = std::min(jobs, std::max<std::size_t>(C, 1));
  const std::size_t inner = std::max<std::size_t>(1, jobs / outer);

  std::vector<CellResult> results(C);
  std::mutex report;
  parallel_for(C, outer, [&](std::size_t k) {
    ScenarioSpec spec;
    spec.x = config.sources[config.cells[k].first];
    spec.y = config.sources[config.cells[k].second];
    spec.n = config.n;
    spec.m = config.m;
    spec.missingness_x = config.missingness_x;
    spec.missingness_y = config.missingness_y;
    spec.procedures = config.procedures;
    spec.replicates = config.replicates;
    spec.alpha = config.alpha;
    spec.seed = derive_seed(config.seed, k);
    results[k] = run_cell(spec, inner);
    if (on_cell) {
      const std::lock_guard<std::mutex> lock(report);
      on_cell(results[k]);
    }
  });

  SweepOutcome out;
  out.table.title = config.title;
  out.table.show_rates = config.missingness_x.mechanism == Mechanism::mar_logistic ||
                         config.missingness_y.mechanism == Mechanism::mar_logistic;
  std::vector<bool> row_used(config.sources.size());
  std::vector<bool> col_used(config.sources.size());
  for (const auto& [i, j] : config.cells) {
    row_used[i] = true;
    col_used[j] = true;
  }
  for (std::size_t s = 0; s < config.sources.size(); ++s) {
    if (row_used[s]) out.table.row_labels.push_back(config.sources[s].label());
    if (col_used[s]) out.table.col_labels.push_back(config.sources[s].label());
  }

  json manifest;
  manifest["name"] = config.name;
  manifest["seed"] = config.seed;
  std::ostringstream hash;
  hash << std::hex << config.config_hash;
  manifest["config_hash"] = hash.str();
  manifest["replicates"] = config.replicates;
  manifest["n"] = config.n;
  manifest["m"] = config.m;
  manifest["alpha"] = config.alpha;
  manifest["jobs"] = jobs;
  manifest["cells"] = json::array();
  manifest["failed_cells"] = json::array();
  for (std::size_t k = 0; k < C; ++k) {
    const CellResult& c = results[k];
    json entry = {{"index", k},
                  {"x", c.x_label},
                  {"y", c.y_label},
                  {"seed", c.seed},
                  {"runtime_seconds", c.runtime_seconds},
                  {"status", c.failed ? "failed" : "ok"}};
    if (c.failed) {
      entry["error"] = c.error;
      manifest["failed_cells"].push_back({{"index", k}, {"seed", c.seed}, {"error", c.error}});
      ++out.failed_cells;
    }
    manifest["cells"].push_back(std::move(entry));
  }
  out.manifest_json = manifest.dump(2);
  out.table.cells = std::move(results);
  return out;
}

} // namespace energy
