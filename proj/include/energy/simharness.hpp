#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "energy/core_data.hpp"
#include "energy/distributions.hpp"
#include "energy/missingness.hpp"
#include "energy/resampling.hpp"

namespace energy {

/// A finite population read from a CSV file.
struct PopulationSource {
  std::filesystem::path path;
  std::vector<std::string> columns = {"pH", "sulphates", "alcohol"};
  std::string role;  // e.g. "white" or "red"
};

/// Reads the selected columns. Throws IngestionError if the file cannot be
/// read, a column is absent or there are no data rows, and ParseError (with
/// line and column) on a non-numeric cell.
DataMatrix load_population(const PopulationSource& src);
DataMatrix parse_population(std::istream& in, const std::vector<std::string>& columns,
                            const std::string& origin = "<stream>");

/// Where one side of a scenario draws its cases from: a parametric law, or a
/// finite population sampled uniformly with replacement.
class DataSource {
public:
  DataSource() = default;
  static DataSource from_dgp(Dgp dgp);
  static DataSource from_population(std::string label, DataMatrix population);

  const std::string& label() const noexcept { return label_; }
  std::size_t dim() const;
  bool is_population() const noexcept { return population_ != nullptr; }
  DataMatrix sample(std::size_t n, Rng& rng) const;

private:
  std::string label_;
  std::shared_ptr<const DgpSampler> sampler_;
  std::shared_ptr<const DataMatrix> population_;
};

/// One power-table cell.
struct ScenarioSpec {
  DataSource x;
  DataSource y;
  std::size_t n = 100;
  std::size_t m = 50;
  MissingnessSpec missingness_x;
  MissingnessSpec missingness_y;
  std::vector<Procedure> procedures;
  std::size_t replicates = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 1;

  /// n, m >= 2, N >= 100, equal dimensions, valid missingness and
  /// procedures. Throws ParameterError / ShapeError.
  void validate() const;
};

struct CellResult {
  std::string x_label;
  std::string y_label;
  /// Rejection percentage per legend slot; empty where no procedure ran
  /// (always so for the missForest slot).
  std::array<std::optional<double>, kLegendSlots> percent{};
  /// Average missing rate per incomplete variable, in [0, 1].
  double missing_rate_x = 0.0;
  double missing_rate_y = 0.0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  bool failed = false;
  std::string error;
};

/// Runs the warp-speed study for one cell. Errors do not propagate: the cell
/// comes back marked failed with the diagnostic.
CellResult run_cell(const ScenarioSpec& spec, std::size_t jobs = 1);

struct PowerTable {
  std::string title;
  /// Adds the per-cell missing-rate row of the logistic layout.
  bool show_rates = false;
  std::vector<std::string> row_labels;  // distributions of X
  std::vector<std::string> col_labels;  // distributions of Y
  std::vector<CellResult> cells;

  const CellResult* find(const std::string& x, const std::string& y) const;
};

enum class TableFormat { csv, markdown };

/// csv: long form, one row per cell and legend slot, percentages in shortest
/// round-trip form. markdown: the legend layout, four rows per X
/// distribution (five with rates) and two columns per Y distribution,
/// percentages rounded to integers.
std::string emit_table(const PowerTable& table, TableFormat format);
/// Inverse of the csv form of emit_table.
PowerTable parse_table_csv(std::istream& in);

/// A sweep over a grid of distributions sharing one design.
struct SweepConfig {
  std::string name;
  std::string title;
  std::vector<DataSource> sources;
  /// (row, column) index pairs into `sources`.
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::size_t n = 100;
  std::size_t m = 50;
  std::size_t replicates = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  MissingnessSpec missingness_x;
  MissingnessSpec missingness_y;
  std::vector<Procedure> procedures;
  std::uint64_t config_hash = 0;
};

/// Parses a scenario document (JSON, schema in docs/scenarios.md). Relative
/// population paths are resolved against `base_dir`, then against
/// $ENERGY_DATA_DIR. Throws SchemaError naming the offending key path.
SweepConfig parse_sweep_config(const std::string& json_text,
                               const std::filesystem::path& base_dir = {});
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct SweepOutcome {
  PowerTable table;
  std::string manifest_json;
  std::size_t failed_cells = 0;
};

using CellCallback = std::function<void(const CellResult&)>;

/// Cell k uses seed derive_seed(config.seed, k). Cells run on up to `jobs`
/// workers; the table does not depend on `jobs`.
SweepOutcome run_sweep(const SweepConfig& config, std::size_t jobs = 1,
                       const CellCallback& on_cell = {});

struct WineStudyOptions {
  MissingnessSpec missingness;
  std::vector<Procedure> procedures;
  std::size_t n = 100;
  std::size_t m = 50;
  std::size_t replicates = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

/// White/red 2 x 2 grid: each replicate draws n cases from the row
/// population and m from the column population, with replacement.
PowerTable run_wine_study(const PopulationSource& white, const PopulationSource& red,
                          const WineStudyOptions& options);

/// 64-bit FNV-1a, used for config hashes.
std::uint64_t fnv1a64(std::string_view text);

} // namespace energy
