#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uwmarl/grid.hpp"

namespace uwmarl {

/// One field measurement in region-local coordinates.
struct SensorSample {
  double time = 0.0;   // seconds since epoch
  double x = 0.0;      // meters east of the region origin
  double y = 0.0;      // meters north of the region origin
  double depth = 0.0;  // meters, >= 0
  double value = 0.0;  // physical measurement, e.g. degrees Celsius
};

/// Malformed sensor log. line() is 1-based and counts the header.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CellStats {
  std::size_t count = 0;
  double mean = 0.0;  // meaningless when count == 0, see has_mean()
  double variance = 0.0;

  [[nodiscard]] bool has_mean() const { return count > 0; }
  friend bool operator==(const CellStats&, const CellStats&) = default;
};

struct BinnedSamples {
  Grid<CellStats> cells;
  std::size_t out_of_region = 0;
};

/// Per-cell reward: sample variance, optionally passed through expand_variance().
struct RewardField {
  Grid<double> rewards;
  bool expanded = false;

  [[nodiscard]] int rows() const { return rewards.rows(); }
  [[nodiscard]] int cols() const { return rewards.cols(); }
  [[nodiscard]] double operator[](const GridPos& p) const { return rewards[p]; }
};

/// Reads a `time,x,y,depth,value` CSV. A header-only file yields an empty list.
std::vector<SensorSample> load_samples(const std::filesystem::path& path);
std::vector<SensorSample> parse_samples(std::istream& in);

/// Assigns each sample to the cell floor(x / cellWidth), floor(y / cellHeight).
/// Samples exactly on the far edge clamp into the last row/column; samples
/// outside [0,width] x [0,height] are excluded and counted.
///
/// Row r covers y in [r*cellHeight, (r+1)*cellHeight). The result does not
/// depend on sample order: each cell's values are sorted before reduction.
BinnedSamples grid_bin(std::span<const SensorSample> samples, const GridSpec& spec);

/// Population variance; 0 for fewer than two values.
double variance(std::span<const double> values);

/// 100^sqrt(x). Throws std::domain_error for negative x.
double expand_variance(double x);

RewardField build_reward_field(const Grid<CellStats>& stats, bool expand);

}  // namespace uwmarl
