// uwmarl: ingest sensor logs, run two-phase missions, sweep engine parameters.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "uwmarl/harness.hpp"
#include "uwmarl/serialize.hpp"

namespace h = uwmarl::harness;

namespace {

struct Common {
  std::string grid = "4x4";
  std::string region = "8x8";
  std::optional<int> agents;
  std::optional<double> a_half, t_half, t_min, t_max, a_min, a_max, gamma;
  std::optional<std::uint64_t> seed;
  std::string mode;
  bool expand = false;
  std::string out = ".";
  std::string config;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--grid", c.grid, "Grid size MxN")->capture_default_str();
  app->add_option("--region", c.region, "Region extent WxH in metres")->capture_default_str();
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "Master seed (UWMARL_SEED overrides)");
}

void add_engine(CLI::App* app, Common& c) {
  app->add_option("--agents", c.agents, "Number of agents");
  app->add_option("--ahalf", c.a_half, "Learning-rate half-life");
  app->add_option("--thalf", c.t_half, "Temperature half-life");
  app->add_option("--tmin", c.t_min);
  app->add_option("--tmax", c.t_max);
  app->add_option("--amin", c.a_min);
  app->add_option("--amax", c.a_max);
  app->add_option("--gamma", c.gamma);
  app->add_option("--mode", c.mode, "seq or conc")->check(CLI::IsMember({"seq", "conc"}));
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
}

uwmarl::GridSpec grid_spec(const Common& c) {
  const auto [m, n] = h::parse_dims(c.grid);
  const auto [w, ht] = h::parse_extent(c.region);
  uwmarl::GridSpec g{m, n, w, ht};
  g.validate();
  return g;
}

std::optional<std::uint64_t> effective_seed(const Common& c) {
  if (const char* env = std::getenv("UWMARL_SEED"); env && *env) {
    std::size_t used = 0;
    const std::string s(env);
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw uwmarl::ConfigError("UWMARL_SEED is not an unsigned integer: '" + s + "'");
    return v;
  }
  return c.seed;
}

void apply_engine_flags(const Common& c, uwmarl::EngineConfig& e) {
  if (c.agents) e.num_agents = *c.agents;
  if (c.a_half) e.learning_rate.half_life = *c.a_half;
  if (c.t_half) e.temperature.half_life = *c.t_half;
  if (c.t_min) e.temperature.v_min = *c.t_min;
  if (c.t_max) e.temperature.v_max = *c.t_max;
  if (c.a_min) e.learning_rate.v_min = *c.a_min;
  if (c.a_max) e.learning_rate.v_max = *c.a_max;
  if (c.gamma) e.gamma = *c.gamma;
  if (c.mode == "seq") e.schedule = uwmarl::ScheduleMode::Sequential;
  if (c.mode == "conc") e.schedule = uwmarl::ScheduleMode::Concurrent;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent Q-learning for adaptive underwater sampling"};
  app.require_subcommand(1);

  Common ingest_c;
  std::string input;
  auto* ingest = app.add_subcommand("ingest", "Bin a sensor log into a reward field");
  ingest->add_option("input", input, "CSV with time,x,y,depth,value")->required()->check(CLI::ExistingFile);
  add_common(ingest, ingest_c);
  ingest->add_flag("--expand", ingest_c.expand, "Apply the 100^sqrt(x) expansion");

  Common run_c;
  std::string run_field = "reference";
  std::string run_samples;
  bool run_raw = false;
  auto* run = app.add_subcommand("run", "Run a two-phase mission");
  run->add_option("--field", run_field, "Field file, 'reference' or 'synthetic'")->capture_default_str();
  run->add_option("--samples", run_samples, "Sensor log for fine maps")->check(CLI::ExistingFile);
  add_common(run, run_c);
  add_engine(run, run_c);
  auto* run_expand = run->add_flag("--expand", run_c.expand, "Expand rewards (default)");
  run->add_flag("--raw", run_raw, "Use raw variances")->excludes(run_expand);

  Common sweep_c;
  std::string sweep_field = "reference";
  h::SweepSpec spec;
  unsigned threads = 0;
  bool sweep_raw = false;
  auto* sweep = app.add_subcommand("sweep", "Sweep agents x aHalf x tHalf over seeds");
  sweep->add_option("--field", sweep_field, "Field file, 'reference' or 'synthetic'")->capture_default_str();
  add_common(sweep, sweep_c);
  add_engine(sweep, sweep_c);
  // --agents/--ahalf/--thalf take lists here.
  sweep->remove_option(sweep->get_option("--agents"));
  sweep->remove_option(sweep->get_option("--ahalf"));
  sweep->remove_option(sweep->get_option("--thalf"));
  sweep->add_option("--agents", spec.agent_counts, "Agent counts")->delimiter(',');
  sweep->add_option("--ahalf", spec.a_half, "aHalf values")->delimiter(',');
  sweep->add_option("--thalf", spec.t_half, "tHalf values")->delimiter(',');
  sweep->add_option("--seeds", spec.seeds, "Seeds per configuration")->capture_default_str();
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");
  auto* sweep_expand = sweep->add_flag("--expand", sweep_c.expand, "Expand rewards (default)");
  sweep->add_flag("--raw", sweep_raw, "Use raw variances")->excludes(sweep_expand);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? h::kSuccess : h::kUsageError;
  }

  try {
    if (*ingest) {
      h::IngestOptions o;
      o.input = input;
      o.grid = grid_spec(ingest_c);
      o.expand = ingest_c.expand;
      o.out_dir = ingest_c.out;
      const auto res = h::cmd_ingest(o);
      std::cout << "samples: " << res.samples << "\nout of region: " << res.out_of_region << '\n';
      return h::kSuccess;
    }
    if (*run) {
      h::RunOptions o;
      o.field = run_field;
      o.samples = run_samples;
      o.grid = grid_spec(run_c);
      o.expand = !run_raw;
      o.out_dir = run_c.out;
      if (!run_c.config.empty()) o.mission = uwmarl::io::mission_config_from_json(uwmarl::io::read_file(run_c.config));
      apply_engine_flags(run_c, o.mission.phase1);
      if (run_c.mode == "conc") o.mission.phase2.schedule = uwmarl::ScheduleMode::Concurrent;
      if (auto s = effective_seed(run_c)) o.mission.seed = *s;
      const int rc = h::cmd_run(o);
      if (rc == h::kNotConverged) std::cerr << "phase 1 did not converge; partial outputs written\n";
      return rc;
    }
    h::SweepOptions o;
    o.field = sweep_field;
    o.grid = grid_spec(sweep_c);
    o.expand = !sweep_raw;
    o.sweep = spec;
    o.threads = threads;
    o.out_dir = sweep_c.out;
    if (!sweep_c.config.empty()) o.engine = uwmarl::io::engine_config_from_json(uwmarl::io::read_file(sweep_c.config));
    apply_engine_flags(sweep_c, o.engine);
    if (auto s = effective_seed(sweep_c)) o.seed = *s;
    const int rc = h::cmd_sweep(o);
    if (rc == h::kNotConverged) std::cerr << "some runs did not converge (NA rows)\n";
    return rc;
  } catch (const uwmarl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return h::kUsageError;
  } catch (const uwmarl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return h::kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return h::kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kUsageError;
  }
}
