#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "uwmarl/engine.hpp"
#include "uwmarl/grid.hpp"
#include "uwmarl/mission.hpp"
#include "uwmarl/sensor_ingest.hpp"

namespace uwmarl::harness {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kSuccess = 0, kUsageError = 1, kNotConverged = 2 };

// ---------------------------------------------------------------------------
// Fields

/// 4 x 4 per-cell temperature variances (degC^2) of a canal survey between
/// 28.3 and 29.4 degC, hottest in the lower-left (row 3, col 0) cell. Stands in
/// for field data that is not distributed with this project.
Grid<double> reference_variances();
RewardField reference_field(bool expand);
GridSpec reference_grid_spec();  // 4 x 4 over 8 m x 8 m

/// Gaussian variance bump plus noise, sampled as a synthetic sensor log.
struct SyntheticFieldSpec {
  GridSpec grid{4, 4, 8.0, 8.0};
  int samples_per_cell = 40;
  double base_value = 28.8;  // mean measurement
  double bump_row = 3.0;     // bump centre in cell units
  double bump_col = 0.0;
  double bump_sigma = 1.5;   // in cells
  double peak_stddev = 0.5;  // measurement spread at the bump centre
  double floor_stddev = 0.1;
};
std::vector<SensorSample> synthetic_samples(const SyntheticFieldSpec& spec, std::uint64_t seed);

/// Samples with spread `hot_stddev` inside one planted quadrant (0 = rows and
/// cols in the lower halves, 1 = lower rows/upper cols, 2 = upper rows/lower
/// cols, 3 = both upper) and `cold_stddev` elsewhere.
std::vector<SensorSample> planted_quadrant_samples(const GridSpec& grid, int quadrant, std::uint64_t seed,
                                                   int samples_per_cell = 30, double hot_stddev = 0.6,
                                                   double cold_stddev = 0.05);
/// Cells of the planted quadrant.
std::vector<GridPos> quadrant_cells(const GridSpec& grid, int quadrant);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSpec {
  std::vector<int> agent_counts{1, 5, 10, 20, 30};
  std::vector<double> a_half{50, 100, 200, 300, 1000};
  std::vector<double> t_half{50, 100, 200, 300, 1000};
  int seeds = 20;

  void validate() const;
};

struct SweepKey {
  int agents = 1;
  double a_half = 100;
  double t_half = 100;
  friend auto operator<=>(const SweepKey&, const SweepKey&) = default;
};

struct SweepRow {
  int seed_index = 0;
  SweepKey key;
  std::optional<std::uint64_t> steps_policy;
  std::optional<std::uint64_t> steps_value;
};

struct SweepSummary {
  SweepKey key;
  std::optional<double> median_policy;
  std::optional<double> median_value;
  int converged = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;          // sorted by (agents, aHalf, tHalf, seed)
  std::vector<SweepSummary> summary;   // one per configuration, same order
  std::map<SweepKey, Grid<double>> visit_percentages;  // mean over seeds
};

/// Seed used for seed index i; shared by every configuration so that
/// comparisons across configurations use common random numbers.
std::uint64_t sweep_seed(std::uint64_t master, int seed_index);

/// Runs the full Cartesian product. `base` supplies every engine setting except
/// agent count, half-lives and seed. threads == 0 picks hardware concurrency.
SweepResult run_sweep(const RewardField& field, const SweepSpec& spec, const EngineConfig& base,
                      std::uint64_t master_seed, unsigned threads = 0);

/// Columns seed,agents,aHalf,tHalf,stepsPolicy,stepsValue; NA for non-convergence.
std::string convergence_csv(const SweepResult& result);
/// Columns agents,aHalf,tHalf,medianPolicy,medianValue,converged.
std::string summary_csv(const SweepResult& result);
void write_sweep(const SweepResult& result, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Subcommands (the CLI parses flags into these and calls them)

std::pair<int, int> parse_dims(const std::string& text);         // "4x4" -> {4, 4}
std::pair<double, double> parse_extent(const std::string& text);  // "8x8" -> {8.0, 8.0}

struct IngestOptions {
  std::filesystem::path input;
  GridSpec grid{4, 4, 8.0, 8.0};
  bool expand = false;
  std::filesystem::path out_dir = ".";
};

struct IngestOutcome {
  RewardField field;
  std::size_t samples = 0;
  std::size_t out_of_region = 0;
};

/// Writes field.csv and field.json into out_dir. Throws ConfigError / ParseError.
IngestOutcome cmd_ingest(const IngestOptions& opts);

struct RunOptions {
  /// Reward field file (.json/.csv) or the keywords "reference" / "synthetic".
  std::string field = "reference";
  std::filesystem::path samples;  // optional sensor log for fine maps
  GridSpec grid{4, 4, 8.0, 8.0};
  bool expand = true;             // for "reference" / "synthetic" / samples
  MissionConfig mission;
  std::filesystem::path out_dir = ".";
};

/// Runs the mission and writes run_report.json, visits.csv, qvalues.csv,
/// global_map.json, fine_roi_<id>.csv and comms_events.csv. Returns an ExitCode.
int cmd_run(const RunOptions& opts);

struct SweepOptions {
  std::string field = "reference";
  GridSpec grid{4, 4, 8.0, 8.0};
  bool expand = true;
  SweepSpec sweep;
  EngineConfig engine;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::filesystem::path out_dir = ".";
};

/// Writes convergence.csv, convergence_summary.csv and heatmaps/. Returns an ExitCode.
int cmd_sweep(const SweepOptions& opts);

/// Resolves a field argument: a file path, "reference", or "synthetic".
RewardField resolve_field(const std::string& field, const GridSpec& grid, bool expand, std::uint64_t seed);

}  // namespace uwmarl::harness
