#include "uwmarl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include "uwmarl/serialize.hpp"
#include "uwmarl/stats.hpp"

namespace uwmarl::harness {

Grid<double> reference_variances() {
  // Rows follow y, so row 3 is the far (lower-left on the survey chart) edge.
  static constexpr double kVar[4][4] = {
      {0.06, 0.04, 0.03, 0.05},
      {0.11, 0.07, 0.05, 0.04},
      {0.19, 0.13, 0.08, 0.06},
      {0.30, 0.21, 0.12, 0.09},
  };
  Grid<double> g(4, 4, 0.0);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) g.at(r, c) = kVar[r][c];
  }
  return g;
}

RewardField reference_field(bool expand) {
  RewardField f{reference_variances(), expand};
  if (expand) {
    for (double& v : f.rewards) v = expand_variance(v);
  }
  return f;
}

GridSpec reference_grid_spec() { return {4, 4, 8.0, 8.0}; }

std::vector<SensorSample> synthetic_samples(const SyntheticFieldSpec& spec, std::uint64_t seed) {
  spec.grid.validate();
  if (spec.samples_per_cell < 0) throw ConfigError("samples per cell must be non-negative");
  Rng rng(derive_seed(seed, 0x5359'4E54ULL));
  std::vector<SensorSample> out;
  const double cw = spec.grid.cell_width();
  const double ch = spec.grid.cell_height();
  double t = 0.0;
  for (int r = 0; r < spec.grid.rows; ++r) {
    for (int c = 0; c < spec.grid.cols; ++c) {
      const double dr = r - spec.bump_row;
      const double dc = c - spec.bump_col;
      const double bump = std::exp(-(dr * dr + dc * dc) / (2.0 * spec.bump_sigma * spec.bump_sigma));
      const double sd = spec.floor_stddev + (spec.peak_stddev - spec.floor_stddev) * bump;
      for (int k = 0; k < spec.samples_per_cell; ++k) {
        SensorSample s;
        s.time = t;
        t += 1.0;
        s.x = (c + rng.uniform()) * cw;
        s.y = (r + rng.uniform()) * ch;
        s.depth = 0.5;
        s.value = spec.base_value + sd * rng.normal();
        out.push_back(s);
      }
    }
  }
  return out;
}

std::vector<GridPos> quadrant_cells(const GridSpec& grid, int quadrant) {
  if (quadrant < 0 || quadrant > 3) throw ConfigError("quadrant must be 0..3");
  const int hr = grid.rows / 2;
  const int hc = grid.cols / 2;
  const bool upper_rows = quadrant >= 2;
  const bool upper_cols = quadrant % 2 == 1;
  std::vector<GridPos> out;
  for (int r = upper_rows ? hr : 0; r < (upper_rows ? grid.rows : hr); ++r) {
    for (int c = upper_cols ? hc : 0; c < (upper_cols ? grid.cols : hc); ++c) out.push_back({r, c});
  }
  return out;
}

std::vector<SensorSample> planted_quadrant_samples(const GridSpec& grid, int quadrant, std::uint64_t seed,
                                                   int samples_per_cell, double hot_stddev, double cold_stddev) {
  grid.validate();
  const auto hot = quadrant_cells(grid, quadrant);
  Rng rng(derive_seed(seed, 0x504C'414EULL));
  std::vector<SensorSample> out;
  double t = 0.0;
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const bool is_hot = std::find(hot.begin(), hot.end(), GridPos{r, c}) != hot.end();
      const double sd = is_hot ? hot_stddev : cold_stddev;
      for (int k = 0; k < samples_per_cell; ++k) {
        SensorSample s;
        s.time = t;
        t += 1.0;
        s.x = (c + rng.uniform()) * grid.cell_width();
        s.y = (r + rng.uniform()) * grid.cell_height();
        s.depth = 0.5;
        s.value = 28.8 + sd * rng.normal();
        out.push_back(s);
      }
    }
  }
  return out;
}

void SweepSpec::validate() const {
  if (agent_counts.empty() || a_half.empty() || t_half.empty()) throw ConfigError("sweep lists must be non-empty");
  if (seeds < 1) throw ConfigError("sweep needs at least one seed");
  for (int v : agent_counts) {
    if (v < 1) throw ConfigError("agent counts must be positive");
  }
  for (double h : a_half) {
    if (!(h > 0.0)) throw ConfigError("aHalf values must be positive");
  }
  for (double h : t_half) {
    if (!(h > 0.0)) throw ConfigError("tHalf values must be positive");
  }
}

std::uint64_t sweep_seed(std::uint64_t master, int seed_index) {
  return derive_seed(master, 0x5357'0000ULL + static_cast<std::uint64_t>(seed_index));
}

SweepResult run_sweep(const RewardField& field, const SweepSpec& spec, const EngineConfig& base,
                      std::uint64_t master_seed, unsigned threads) {
  spec.validate();
  base.validate();

  std::vector<SweepKey> keys;
  for (int v : spec.agent_counts) {
    for (double a : spec.a_half) {
      for (double t : spec.t_half) keys.push_back({v, a, t});
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  struct Cell {
    SweepRow row;
    Grid<std::uint64_t> visits;
  };
  const std::size_t seeds = static_cast<std::size_t>(spec.seeds);
  std::vector<Cell> cells(keys.size() * seeds);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const SweepKey& key = keys[i / seeds];
        const int s = static_cast<int>(i % seeds);
        EngineConfig cfg = base;
        cfg.num_agents = key.agents;
        cfg.learning_rate.half_life = key.a_half;
        cfg.temperature.half_life = key.t_half;
        cfg.seed = sweep_seed(master_seed, s);
        cfg.start_positions.clear();
        const RunReport rep = run(field, cfg);
        cells[i] = Cell{{s, key, rep.steps_to_policy_convergence, rep.steps_to_value_convergence}, rep.visit_counts};
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
        next = cells.size();
        return;
      }
    }
  };

  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, cells.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    SweepSummary sum;
    sum.key = keys[k];
    std::vector<std::optional<double>> pol, val;
    Grid<double> mean(field.rows(), field.cols(), 0.0);
    for (std::size_t s = 0; s < seeds; ++s) {
      const Cell& c = cells[k * seeds + s];
      out.rows.push_back(c.row);
      pol.push_back(c.row.steps_policy ? std::optional<double>(static_cast<double>(*c.row.steps_policy)) : std::nullopt);
      val.push_back(c.row.steps_value ? std::optional<double>(static_cast<double>(*c.row.steps_value)) : std::nullopt);
      if (c.row.steps_policy) ++sum.converged;
      const Grid<double> pct = visit_percentages(c.visits);
      for (std::size_t i = 0; i < pct.size(); ++i) mean.values()[i] += pct.values()[i] / static_cast<double>(seeds);
    }
    sum.median_policy = stats::median_with_censoring(pol);
    sum.median_value = stats::median_with_censoring(val);
    out.summary.push_back(sum);
    out.visit_percentages.emplace(keys[k], std::move(mean));
  }
  return out;
}

namespace {

std::string opt_cell(const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : "NA"; }
std::string opt_cell(const std::optional<double>& v) { return v ? io::format_double(*v) : "NA"; }

std::string key_cells(const SweepKey& k) {
  return std::to_string(k.agents) + ',' + io::format_double(k.a_half) + ',' + io::format_double(k.t_half);
}

}  // namespace

std::string convergence_csv(const SweepResult& result) {
  std::string out = "seed,agents,aHalf,tHalf,stepsPolicy,stepsValue\n";
  for (const auto& r : result.rows) {
    out += std::to_string(r.seed_index) + ',' + key_cells(r.key) + ',' + opt_cell(r.steps_policy) + ',' +
           opt_cell(r.steps_value) + '\n';
  }
  return out;
}

std::string summary_csv(const SweepResult& result) {
  std::string out = "agents,aHalf,tHalf,medianPolicy,medianValue,converged\n";
  for (const auto& s : result.summary) {
    out += key_cells(s.key) + ',' + opt_cell(s.median_policy) + ',' + opt_cell(s.median_value) + ',' +
           std::to_string(s.converged) + '\n';
  }
  return out;
}

void write_sweep(const SweepResult& result, const std::filesystem::path& out_dir) {
  io::write_file(out_dir / "convergence.csv", convergence_csv(result));
  io::write_file(out_dir / "convergence_summary.csv", summary_csv(result));
  for (const auto& [key, grid] : result.visit_percentages) {
    const std::string name = "visits_V" + std::to_string(key.agents) + "_a" + io::format_double(key.a_half) + "_t" +
                             io::format_double(key.t_half) + ".csv";
    io::write_file(out_dir / "heatmaps" / name, io::grid_to_csv(grid));
  }
}

std::pair<int, int> parse_dims(const std::string& text) {
  int a = 0, b = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &a, &x, &b, &extra) != 3 || (x != 'x' && x != 'X')) {
    throw ConfigError("expected MxN, got '" + text + "'");
  }
  if (a <= 0 || b <= 0) throw ConfigError("grid dimensions must be positive: '" + text + "'");
  return {a, b};
}

std::pair<double, double> parse_extent(const std::string& text) {
  double a = 0, b = 0;
  char x = 0, extra = 0;
  if (std::sscanf(text.c_str(), "%lf%c%lf%c", &a, &x, &b, &extra) != 3 || (x != 'x' && x != 'X')) {
    throw ConfigError("expected WxH, got '" + text + "'");
  }
  if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("region extent must be positive: '" + text + "'");
  return {a, b};
}

IngestOutcome cmd_ingest(const IngestOptions& opts) {
  opts.grid.validate();
  const auto samples = load_samples(opts.input);
  const auto binned = grid_bin(samples, opts.grid);
  IngestOutcome out{build_reward_field(binned.cells, opts.expand), samples.size(), binned.out_of_region};
  io::write_file(opts.out_dir / "field.csv", io::reward_field_to_csv(out.field));
  io::write_file(opts.out_dir / "field.json", io::reward_field_to_json(out.field));
  return out;
}

RewardField resolve_field(const std::string& field, const GridSpec& grid, bool expand, std::uint64_t seed) {
  if (field == "reference") return reference_field(expand);
  if (field == "synthetic") {
    grid.validate();
    SyntheticFieldSpec spec;
    spec.grid = grid;
    spec.bump_row = grid.rows - 1;
    spec.bump_col = 0;
    spec.bump_sigma = std::max(1.0, 0.375 * std::min(grid.rows, grid.cols));
    return build_reward_field(grid_bin(synthetic_samples(spec, seed), grid).cells, expand);
  }
  return io::load_reward_field(field);
}

int cmd_run(const RunOptions& opts) {
  opts.mission.validate();
  std::vector<SensorSample> samples;
  RewardField field;
  GridSpec grid = opts.grid;
  if (!opts.samples.empty()) {
    samples = load_samples(opts.samples);
    grid.validate();
    field = build_reward_field(grid_bin(samples, grid).cells, opts.expand);
  } else {
    field = resolve_field(opts.field, grid, opts.expand, opts.mission.seed);
    if (opts.field == "reference") grid = reference_grid_spec();
    if (field.rows() != grid.rows || field.cols() != grid.cols) {
      grid.rows = field.rows();
      grid.cols = field.cols();
    }
  }

  const GlobalMap map = run_mission(field, samples, grid, opts.mission);
  const auto& dir = opts.out_dir;
  io::write_file(dir / "run_report.json", io::run_report_to_json(map.phase1));
  io::write_file(dir / "visits.csv", io::grid_to_csv(map.phase1.visit_counts));
  io::write_file(dir / "qvalues.csv", io::q_table_to_csv(map.phase1.final_q));
  io::write_file(dir / "global_map.json", io::global_map_to_json(map));
  io::write_file(dir / "comms_events.csv", io::events_to_csv(map.comms_log));
  for (const auto& f : map.fine) {
    io::write_file(dir / ("fine_roi_" + std::to_string(f.roi_id) + ".csv"), io::grid_to_csv(f.measured));
    SearchedRegistry reg(f.searched_by.rows(), f.searched_by.cols());
    for (std::size_t i = 0; i < f.searched_by.size(); ++i) {
      const int who = f.searched_by.values()[i];
      if (who < 0) continue;
      reg.claim_cell(f.searched_by.pos(i), who);
      reg.mark_searched(f.searched_by.pos(i), who);
    }
    io::write_file(dir / ("registry_roi_" + std::to_string(f.roi_id) + ".csv"), io::registry_to_csv(reg));
  }
  return map.aborted ? kNotConverged : kSuccess;
}

int cmd_sweep(const SweepOptions& opts) {
  const RewardField field = resolve_field(opts.field, opts.grid, opts.expand, opts.seed);
  const SweepResult result = run_sweep(field, opts.sweep, opts.engine, opts.seed, opts.threads);
  write_sweep(result, opts.out_dir);
  const bool all = std::all_of(result.rows.begin(), result.rows.end(),
                               [](const SweepRow& r) { return r.steps_policy.has_value(); });
  return all ? kSuccess : kNotConverged;
}

}  // namespace uwmarl::harness
