#include "energy/simharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <sstream>

#include "energy/csv.hpp"
#include "energy/errors.hpp"

namespace energy {

DataMatrix parse_population(std::istream& in, const std::vector<std::string>& columns,
                            const std::string& origin) {
  if (columns.empty()) throw ParameterError(origin + ": no columns selected");
  const CsvTable table = read_csv_table(in, CsvOptions{std::nullopt, true});
  std::vector<std::size_t> index;
  for (const auto& name : columns) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw IngestionError(origin + ": column '" + name + "' not found");
    }
    index.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  if (table.rows.empty()) throw IngestionError(origin + ": empty population (no data rows)");
  DataMatrix out(table.rows.size(), columns.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    for (std::size_t c = 0; c < index.size(); ++c) {
      const std::size_t k = index[c];
      const auto v = k < fields.size() ? parse_number(fields[k]) : std::nullopt;
      if (!v) {
        throw ParseError(origin + ": non-numeric value in column '" + columns[c] + "' at line " +
                         std::to_string(table.lines[r]) + ", column " + std::to_string(k + 1));
      }
      out(r, c) = *v;
    }
  }
  return out;
}

DataMatrix load_population(const PopulationSource& src) {
  std::ifstream in(src.path);
  if (!in) throw IngestionError("cannot open population file '" + src.path.string() + "'");
  return parse_population(in, src.columns, src.path.string());
}

DataSource DataSource::from_dgp(Dgp dgp) {
  DataSource s;
  s.label_ = dgp.label;
  s.sampler_ = std::make_shared<const DgpSampler>(std::move(dgp));
  return s;
}

DataSource DataSource::from_population(std::string label, DataMatrix population) {
  if (population.rows() == 0) throw EmptyInputError("population '" + label + "' is empty");
  DataSource s;
  s.label_ = std::move(label);
  s.population_ = std::make_shared<const DataMatrix>(std::move(population));
  return s;
}

std::size_t DataSource::dim() const {
  if (population_) return population_->cols();
  if (sampler_) return sampler_->dgp().dim();
  return 0;
}

DataMatrix DataSource::sample(std::size_t n, Rng& rng) const {
  if (sampler_) return sampler_->sample(n, rng);
  if (!population_) throw PreconditionError("data source is empty");
  const auto& pop = *population_;
  std::uniform_int_distribution<std::size_t> pick(0, pop.rows() - 1);
  DataMatrix out(n, pop.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = pop.row(pick(rng));
    for (std::size_t k = 0; k < pop.cols(); ++k) out(i, k) = row[k];
  }
  return out;
}

void ScenarioSpec::validate() const {
  if (n < 2 || m < 2) throw ParameterError("scenario: n and m must be >= 2");
  if (replicates < 100) throw ParameterError("scenario: replicates must be >= 100");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("scenario: alpha must lie in (0, 1)");
  if (x.dim() == 0 || y.dim() == 0) throw ParameterError("scenario: missing data source");
  if (x.dim() != y.dim()) throw ShapeError("scenario: x and y dimensions differ");
  if (procedures.empty()) throw ParameterError("scenario: no procedures");
  missingness_x.validate(x.dim());
  missingness_y.validate(y.dim());
  for (const auto& p : procedures) p.validate();
}

CellResult run_cell(const ScenarioSpec& spec, std::size_t jobs) {
  CellResult cell;
  cell.x_label = spec.x.label();
  cell.y_label = spec.y.label();
  cell.seed = spec.seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    spec.validate();
    const ReplicateGenerator generate = [&spec](Rng& rng) {
      IncompleteSample x(spec.x.sample(spec.n, rng));
      IncompleteSample y(spec.y.sample(spec.m, rng));
      x = apply_missingness(x, spec.missingness_x, rng);
      y = apply_missingness(y, spec.missingness_y, rng);
      return std::make_pair(std::move(x), std::move(y));
    };
    WarpSpeedOptions options;
    options.replicates = spec.replicates;
    options.alpha = spec.alpha;
    options.seed = spec.seed;
    options.jobs = jobs;
    options.rate_columns = spec.missingness_x.affected_columns(spec.x.dim());
    options.rate_columns_y = spec.missingness_y.affected_columns(spec.y.dim());
    const WarpSpeedResult result = warp_speed_study(generate, spec.procedures, options);
    for (std::size_t p = 0; p < result.procedures.size(); ++p) {
      cell.percent[legend_slot(result.procedures[p])] =
          100.0 * static_cast<double>(result.rejections[p]) / static_cast<double>(result.replicates);
    }
    // An empty column set would report the rate over all columns.
    cell.missing_rate_x = options.rate_columns.empty() ? 0.0 : result.missing_rate_x;
    cell.missing_rate_y = options.rate_columns_y.empty() ? 0.0 : result.missing_rate_y;
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  cell.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

const CellResult* PowerTable::find(const std::string& x, const std::string& y) const {
  for (const auto& c : cells) {
    if (c.x_label == x && c.y_label == y) return &c;
  }
  return nullptr;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string rounded(double v) { return std::to_string(std::lround(v)); }

constexpr const char* kCsvHeader =
    "x,y,slot,procedure,percent,missing_rate_x,missing_rate_y,status";

std::string emit_csv(const PowerTable& table) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& c : table.cells) {
    for (std::size_t s = 0; s < kLegendSlots; ++s) {
      out << csv_field(c.x_label) << ',' << csv_field(c.y_label) << ',' << s << ','
          << legend_slot_name(s) << ',';
      out << (c.percent[s] ? format_double(*c.percent[s]) : std::string("n/a")) << ',';
      out << format_double(c.missing_rate_x) << ',' << format_double(c.missing_rate_y) << ',';
      out << (c.failed ? "failed" : "ok") << '\n';
    }
  }
  return out.str();
}

std::string emit_markdown(const PowerTable& table) {
  std::ostringstream out;
  if (!table.title.empty()) out << "**" << md_escape(table.title) << "**\n\n";
  out << "| % |";
  for (const auto& y : table.col_labels) out << ' ' << md_escape(y) << " | |";
  out << "\n|---|";
  for (std::size_t j = 0; j < table.col_labels.size(); ++j) out << "---|---|";
  out << '\n';
  const std::size_t layout_rows = 4;
  for (const auto& x : table.row_labels) {
    if (table.show_rates) {
      out << "| " << md_escape(x) << " |";
      for (const auto& y : table.col_labels) {
        const CellResult* c = table.find(x, y);
        if (!c || c->failed) {
          out << "  |  |";
        } else {
          out << " <u>" << rounded(100.0 * c->missing_rate_x) << "</u> | <u>"
              << rounded(100.0 * c->missing_rate_y) << "</u> |";
        }
      }
      out << '\n';
    }
    for (std::size_t r = 0; r < layout_rows; ++r) {
      out << "| " << (r == 0 && !table.show_rates ? md_escape(x) : std::string()) << " |";
      for (const auto& y : table.col_labels) {
        const CellResult* c = table.find(x, y);
        for (std::size_t side = 0; side < 2; ++side) {
          const std::size_t slot = side * layout_rows + r;
          std::string v;
          if (c && c->failed) {
            v = "fail";
          } else if (c && c->percent[slot]) {
            v = rounded(*c->percent[slot]);
          } else if (c && slot == kMissForestSlot) {
            v = "n/a";
          }
          out << ' ' << v << " |";
        }
      }
      out << '\n';
    }
  }
  for (const auto& c : table.cells) {
    if (c.failed) out << "\nfailed: " << md_escape(c.x_label) << " vs " << md_escape(c.y_label)
                      << ": " << c.error << '\n';
  }
  return out.str();
}

} // namespace

std::string emit_table(const PowerTable& table, TableFormat format) {
  return format == TableFormat::csv ? emit_csv(table) : emit_markdown(table);
}

PowerTable parse_table_csv(std::istream& in) {
  const CsvTable csv = read_csv_table(in, CsvOptions{',', true});
  if (csv.header != split_csv_line(kCsvHeader, ',')) {
    throw SchemaError("table csv: unexpected header");
  }
  PowerTable table;
  std::map<std::pair<std::string, std::string>, std::size_t> where;
  const auto number = [&](const std::string& f, std::size_t r) {
    const auto v = parse_number(f);
    if (!v) {
      throw ParseError("table csv: non-numeric value '" + f + "' at line " +
                       std::to_string(csv.lines[r]));
    }
    return *v;
  };
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& f = csv.rows[r];
    if (f.size() != 8) {
      throw ParseError("table csv: expected 8 fields at line " + std::to_string(csv.lines[r]));
    }
    const auto key = std::make_pair(f[0], f[1]);
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, table.cells.size()).first;
      CellResult c;
      c.x_label = f[0];
      c.y_label = f[1];
      c.missing_rate_x = number(f[5], r);
      c.missing_rate_y = number(f[6], r);
      c.failed = f[7] == "failed";
      table.cells.push_back(std::move(c));
      if (std::find(table.row_labels.begin(), table.row_labels.end(), f[0]) ==
          table.row_labels.end()) {
        table.row_labels.push_back(f[0]);
      }
      if (std::find(table.col_labels.begin(), table.col_labels.end(), f[1]) ==
          table.col_labels.end()) {
        table.col_labels.push_back(f[1]);
      }
    }
    const double slot = number(f[2], r);
    if (slot < 0 || slot >= static_cast<double>(kLegendSlots) || slot != std::floor(slot)) {
      throw ParseError("table csv: bad slot at line " + std::to_string(csv.lines[r]));
    }
    if (f[4] != "n/a") table.cells[it->second].percent[static_cast<std::size_t>(slot)] =
        number(f[4], r);
  }
  return table;
}

PowerTable run_wine_study(const PopulationSource& white, const PopulationSource& red,
                          const WineStudyOptions& options) {
  const std::vector<DataSource> sources = {
      DataSource::from_population("White", load_population(white)),
      DataSource::from_population("Red", load_population(red))};
  PowerTable table;
  table.show_rates = options.missingness.mechanism == Mechanism::mar_logistic;
  table.row_labels = {"White", "Red"};
  table.col_labels = table.row_labels;
  std::uint64_t k = 0;
  for (const auto& sx : sources) {
    for (const auto& sy : sources) {
      ScenarioSpec spec;
      spec.x = sx;
      spec.y = sy;
      spec.n = options.n;
      spec.m = options.m;
      spec.missingness_x = options.missingness;
      spec.missingness_y = options.missingness;
      spec.procedures = options.procedures;
      spec.replicates = options.replicates;
      spec.alpha = options.alpha;
      spec.seed = derive_seed(options.seed, k++);
      table.cells.push_back(run_cell(spec, options.jobs));
    }
  }
  return table;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace energy
