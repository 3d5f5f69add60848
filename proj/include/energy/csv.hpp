#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "energy/core_data.hpp"

namespace energy {

/// Reading options for the CSV interchange format.
///
/// Comma- or semicolon-delimited, optional header row, an empty field or a
/// literal `NA` denotes a missing value. Double quotes around a field are
/// stripped.
struct CsvOptions {
  /// Unset: detect from the first non-empty line (';' wins if it occurs more
  /// often than ',').
  std::optional<char> delimiter;
  /// Unset: the first row is a header iff it contains a field that is neither
  /// missing nor numeric.
  std::optional<bool> header;
};

struct CsvTable {
  char delimiter = ',';
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;
};

/// Split one CSV line honoring double quotes.
std::vector<std::string> split_csv_line(const std::string& line, char delimiter);

CsvTable read_csv_table(std::istream& in, const CsvOptions& options = {});

bool is_missing_token(const std::string& field);
/// Strict full-field parse; nullopt if `field` is not a finite number.
std::optional<double> parse_number(const std::string& field);

/// Parse a sample; throws ParseError naming line and column on a
/// non-numeric cell and ShapeError on ragged rows.
IncompleteSample parse_sample_csv(std::istream& in, const CsvOptions& options = {});
IncompleteSample read_sample_csv(const std::filesystem::path& path,
                                 const CsvOptions& options = {});

/// Missing cells are written as `NA`; values use the shortest
/// representation that round-trips.
void write_sample_csv(std::ostream& out, const IncompleteSample& sample, char delimiter = ',',
                      const std::vector<std::string>& header = {});

/// Shortest round-trip decimal form of `v`.
std::string format_double(double v);

} // namespace energy
