#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include "uwmarl/harness.hpp"
#include "uwmarl/serialize.hpp"

using namespace uwmarl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("uwmarl_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

harness::SweepSpec tiny() {
  harness::SweepSpec s;
  s.agent_counts = {1, 3};
  s.a_half = {100};
  s.t_half = {50, 100};
  s.seeds = 3;
  return s;
}

EngineConfig policy_only() {
  EngineConfig c;
  c.run_until_value_convergence = false;
  return c;
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(UWMARL_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(ParseDims, Forms) {
  EXPECT_EQ(harness::parse_dims("4x4"), (std::pair{4, 4}));
  EXPECT_EQ(harness::parse_dims("3X7"), (std::pair{3, 7}));
  EXPECT_THROW(harness::parse_dims("4"), ConfigError);
  EXPECT_THROW(harness::parse_dims("4x0"), ConfigError);
  EXPECT_THROW(harness::parse_dims("4x4x4"), ConfigError);
  EXPECT_EQ(harness::parse_extent("8x2.5"), (std::pair{8.0, 2.5}));
  EXPECT_THROW(harness::parse_extent("0x8"), ConfigError);
}

TEST(ReferenceField, ShapeAndHotCorner) {
  const auto raw = harness::reference_variances();
  ASSERT_EQ(raw.rows(), 4);
  double best = -1;
  GridPos arg{};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.values()[i] > best) {
      best = raw.values()[i];
      arg = raw.pos(i);
    }
  }
  EXPECT_EQ(arg, (GridPos{3, 0}));
  const auto ex = harness::reference_field(true);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_DOUBLE_EQ(ex.rewards.values()[i], expand_variance(raw.values()[i]));
}

TEST(Synthetic, SeededAndBumpIsHottest) {
  harness::SyntheticFieldSpec spec;
  const auto a = harness::synthetic_samples(spec, 4);
  const auto b = harness::synthetic_samples(spec, 4);
  ASSERT_EQ(a.size(), 16u * 40u);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].value, b[i].value);
  const auto binned = grid_bin(a, spec.grid);
  EXPECT_EQ(binned.out_of_region, 0u);
  EXPECT_GT(binned.cells.at(3, 0).variance, binned.cells.at(0, 3).variance);
}

TEST(Quadrant, CellsAndSamples) {
  const GridSpec g{4, 6, 8, 12};
  std::set<GridPos> all;
  for (int q = 0; q < 4; ++q) {
    const auto cells = harness::quadrant_cells(g, q);
    EXPECT_EQ(cells.size(), 6u);
    all.insert(cells.begin(), cells.end());
  }
  EXPECT_EQ(all.size(), 24u);
  EXPECT_THROW(harness::quadrant_cells(g, 4), ConfigError);
}

TEST(Sweep, CardinalityAndCanonicalOrder) {
  const auto field = harness::reference_field(true);
  const auto spec = tiny();
  const auto res = harness::run_sweep(field, spec, policy_only(), 9, 4);
  ASSERT_EQ(res.rows.size(), 2u * 1u * 2u * 3u);
  std::set<std::tuple<int, int, double, double>> seen;
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    EXPECT_TRUE(seen.insert({r.seed_index, r.key.agents, r.key.a_half, r.key.t_half}).second);
    if (i > 0) {
      const auto& p = res.rows[i - 1];
      EXPECT_TRUE(std::tie(p.key, p.seed_index) < std::tie(r.key, r.seed_index));
    }
  }
  EXPECT_EQ(res.summary.size(), 4u);
  EXPECT_EQ(res.visit_percentages.size(), 4u);
}

TEST(Sweep, SingleCell) {
  harness::SweepSpec s;
  s.agent_counts = {1};
  s.a_half = {100};
  s.t_half = {100};
  s.seeds = 1;
  const auto res = harness::run_sweep(harness::reference_field(true), s, policy_only(), 0);
  EXPECT_EQ(res.rows.size(), 1u);
  const auto csv = harness::convergence_csv(res);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "seed,agents,aHalf,tHalf,stepsPolicy,stepsValue");
}

TEST(Sweep, DefaultSpecSize) {
  const harness::SweepSpec s;
  EXPECT_EQ(s.agent_counts.size() * s.a_half.size() * s.t_half.size() * static_cast<std::size_t>(s.seeds), 2500u);
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
  const auto field = harness::reference_field(true);
  const auto a = harness::run_sweep(field, tiny(), policy_only(), 1, 1);
  const auto b = harness::run_sweep(field, tiny(), policy_only(), 1, 8);
  EXPECT_EQ(harness::convergence_csv(a), harness::convergence_csv(b));
  EXPECT_EQ(harness::summary_csv(a), harness::summary_csv(b));
}

TEST(Sweep, Validation) {
  harness::SweepSpec s = tiny();
  s.seeds = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = tiny();
  s.a_half.clear();
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Ingest, EmptyLogGivesAllOnes) {
  const auto dir = fresh_dir("ingest");
  io::write_file(dir / "log.csv", "time,x,y,depth,value\n");
  harness::IngestOptions o;
  o.input = dir / "log.csv";
  o.expand = true;
  o.out_dir = dir;
  const auto res = harness::cmd_ingest(o);
  for (double v : res.field.rewards) EXPECT_EQ(v, 1.0);
  const auto back = io::load_reward_field(dir / "field.json");
  EXPECT_EQ(back.rewards, res.field.rewards);
  fs::remove_all(dir);
}

TEST(Ingest, ZeroWidthIsConfigError) {
  harness::IngestOptions o;
  o.input = "/nonexistent/never/read.csv";
  o.grid.width = 0;
  EXPECT_THROW(harness::cmd_ingest(o), ConfigError);
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh_dir("cli");
  EXPECT_EQ(run_cli("--bogus"), 1);
  EXPECT_EQ(run_cli("ingest " + (dir / "missing.csv").string()), 1);
  io::write_file(dir / "log.csv", "time,x,y,depth,value\n0,1,1,0.5,28.3\n");
  EXPECT_EQ(run_cli("ingest " + (dir / "log.csv").string() + " --region 0x8 --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("ingest " + (dir / "log.csv").string() + " --expand --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "field.csv"));
  EXPECT_EQ(run_cli("run --out " + (dir / "run").string()), 0);
  for (const char* f : {"run_report.json", "visits.csv", "qvalues.csv", "global_map.json", "comms_events.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  io::write_file(dir / "short.json", "{\"phase1\": {\"maxSteps\": 20, \"convergenceWindow\": 10}}");
  EXPECT_EQ(run_cli("run --config " + (dir / "short.json").string() + " --out " + (dir / "short").string()), 2);
  EXPECT_TRUE(fs::exists(dir / "short" / "run_report.json"));
  fs::remove_all(dir);
}

TEST(Cli, SweepIsByteIdenticalAndSeedEnvOverrides) {
  const auto dir = fresh_dir("cli_sweep");
  const std::string args = "sweep --agents 1,2 --ahalf 100 --thalf 100 --seeds 2 --mode seq --seed 3 --out ";
  ASSERT_EQ(run_cli(args + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli(args + (dir / "b").string()), 0);
  EXPECT_EQ(io::read_file(dir / "a" / "convergence.csv"), io::read_file(dir / "b" / "convergence.csv"));
  ASSERT_EQ(run_cli("sweep --agents 1,2 --ahalf 100 --thalf 100 --seeds 2 --mode seq --seed 4 --out " +
                    (dir / "c").string()),
            0);
  const std::string env = "UWMARL_SEED=3 ";
  const int rc = std::system((env + UWMARL_CLI_PATH + " sweep --agents 1,2 --ahalf 100 --thalf 100 --seeds 2 --seed 4 --out " +
                              (dir / "d").string() + " >/dev/null 2>&1")
                                 .c_str());
  ASSERT_EQ(WEXITSTATUS(rc), 0);
  EXPECT_EQ(io::read_file(dir / "a" / "convergence.csv"), io::read_file(dir / "d" / "convergence.csv"));
  EXPECT_NE(io::read_file(dir / "a" / "convergence.csv"), io::read_file(dir / "c" / "convergence.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "heatmaps"));
  fs::remove_all(dir);
}
