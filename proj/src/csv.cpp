#include "energy/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "energy/errors.hpp"

namespace energy {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

char detect_delimiter(const std::string& line) {
  const auto semis = std::count(line.begin(), line.end(), ';');
  const auto commas = std::count(line.begin(), line.end(), ',');
  return semis > commas ? ';' : ',';
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(trim(cur));
      cur.clear();
    } else if (c != '\r' && c != '\n') {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool is_missing_token(const std::string& field) { return field.empty() || field == "NA"; }

std::optional<double> parse_number(const std::string& field) {
  const std::string s = trim(field);
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

CsvTable read_csv_table(std::istream& in, const CsvOptions& options) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (first) {
      table.delimiter = options.delimiter.value_or(detect_delimiter(line));
      auto fields = split_csv_line(line, table.delimiter);
      bool header = false;
      if (options.header) {
        header = *options.header;
      } else {
        header = std::any_of(fields.begin(), fields.end(), [](const std::string& f) {
          return !is_missing_token(f) && !parse_number(f);
        });
      }
      first = false;
      if (header) {
        table.header = std::move(fields);
        continue;
      }
      table.rows.push_back(std::move(fields));
      table.lines.push_back(lineno);
      continue;
    }
    table.rows.push_back(split_csv_line(line, table.delimiter));
    table.lines.push_back(lineno);
  }
  return table;
}

IncompleteSample parse_sample_csv(std::istream& in, const CsvOptions& options) {
  const CsvTable table = read_csv_table(in, options);
  if (table.rows.empty()) throw EmptyInputError("csv: no data rows");
  std::vector<std::vector<std::optional<double>>> cells;
  cells.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    std::vector<std::optional<double>> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (is_missing_token(fields[c])) {
        row.emplace_back(std::nullopt);
        continue;
      }
      auto v = parse_number(fields[c]);
      if (!v) {
        throw ParseError("csv: non-numeric value '" + fields[c] + "' at line " +
                         std::to_string(table.lines[r]) + ", column " + std::to_string(c + 1));
      }
      row.emplace_back(*v);
    }
    cells.push_back(std::move(row));
  }
  return build_sample(cells);
}

IncompleteSample read_sample_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  return parse_sample_csv(in, options);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, ptr};
}

void write_sample_csv(std::ostream& out, const IncompleteSample& sample, char delimiter,
                      const std::vector<std::string>& header) {
  if (!header.empty()) {
    if (header.size() != sample.dim()) throw ShapeError("csv header width mismatch");
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (k) out << delimiter;
      out << header[k];
    }
    out << '\n';
  }
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    for (std::size_t k = 0; k < sample.dim(); ++k) {
      if (k) out << delimiter;
      if (sample.observed(i, k)) {
        out << format_double(sample.value(i, k));
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
}

} // namespace energy
