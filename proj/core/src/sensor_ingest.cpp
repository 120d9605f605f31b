#include "uwmarl/sensor_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

namespace uwmarl {

void GridSpec::validate() const {
  if (rows <= 0 || cols <= 0) throw ConfigError("grid must have at least one row and one column");
  if (!(width > 0.0) || !std::isfinite(width)) throw ConfigError("region width must be positive");
  if (!(height > 0.0) || !std::isfinite(height)) throw ConfigError("region height must be positive");
}

std::string to_string(const GridPos& p) {
  return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view text, std::size_t line, std::string_view name) {
  text = trim(text);
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(line, "column '" + std::string(name) + "' is not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<SensorSample> parse_samples(std::istream& in) {
  static constexpr std::string_view kColumns[] = {"time", "x", "y", "depth", "value"};

  std::vector<SensorSample> out;
  std::string raw;
  std::size_t line = 0;
  bool header_seen = false;

  while (std::getline(in, raw)) {
    ++line;
    std::string_view row = trim(raw);
    if (line == 1 && row.size() >= 3 && row.substr(0, 3) == "\xEF\xBB\xBF") row.remove_prefix(3);
    if (row.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = row.find(',', start);
      fields.push_back(trim(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5) {
      throw ParseError(line, "expected 5 columns, found " + std::to_string(fields.size()));
    }

    if (!header_seen) {
      for (std::size_t i = 0; i < 5; ++i) {
        if (fields[i] != kColumns[i]) throw ParseError(line, "header must be time,x,y,depth,value");
      }
      header_seen = true;
      continue;
    }

    SensorSample s;
    s.time = parse_field(fields[0], line, "time");
    s.x = parse_field(fields[1], line, "x");
    s.y = parse_field(fields[2], line, "y");
    s.depth = parse_field(fields[3], line, "depth");
    s.value = parse_field(fields[4], line, "value");
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw ParseError(line, "x and y must be finite");
    if (!(s.depth >= 0.0)) throw ParseError(line, "depth must be >= 0");
    if (!std::isfinite(s.value)) throw ParseError(line, "value must be finite");
    out.push_back(s);
  }
  return out;
}

std::vector<SensorSample> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sensor log " + path.string());
  return parse_samples(in);
}

double variance(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 1) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(n);
}

double expand_variance(double x) {
  if (!(x >= 0.0)) throw std::domain_error("expand_variance requires x >= 0");
  return std::pow(100.0, std::sqrt(x));
}

BinnedSamples grid_bin(std::span<const SensorSample> samples, const GridSpec& spec) {
  spec.validate();
  const double cw = spec.cell_width();
  const double ch = spec.cell_height();

  std::vector<std::vector<double>> buckets(static_cast<std::size_t>(spec.cell_count()));
  BinnedSamples out{Grid<CellStats>(spec.rows, spec.cols), 0};

  for (const auto& s : samples) {
    if (!(s.x >= 0.0 && s.x <= spec.width && s.y >= 0.0 && s.y <= spec.height)) {
      ++out.out_of_region;
      continue;
    }
    const int col = std::min(static_cast<int>(std::floor(s.x / cw)), spec.cols - 1);
    const int row = std::min(static_cast<int>(std::floor(s.y / ch)), spec.rows - 1);
    buckets[out.cells.index({row, col})].push_back(s.value);
  }

  for (std::size_t i = 0; i < buckets.size(); ++i) {
    auto& b = buckets[i];
    std::sort(b.begin(), b.end());
    CellStats& c = out.cells.values()[i];
    c.count = b.size();
    if (!b.empty()) {
      double sum = 0.0;
      for (double v : b) sum += v;
      c.mean = sum / static_cast<double>(b.size());
    }
    c.variance = variance(b);
  }
  return out;
}

RewardField build_reward_field(const Grid<CellStats>& stats, bool expand) {
  RewardField f{Grid<double>(stats.rows(), stats.cols(), 0.0), expand};
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const double v = stats.values()[i].variance;
    f.rewards.values()[i] = expand ? expand_variance(v) : v;
  }
  return f;
}

}  // namespace uwmarl
