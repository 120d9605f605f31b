#include "uwmarl/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace uwmarl::io {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

template <typename T>
json grid_json(const Grid<T>& g) {
  json rows = json::array();
  for (int r = 0; r < g.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < g.cols(); ++c) {
      const T& v = g.at(r, c);
      if constexpr (std::is_floating_point_v<T>) {
        row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json policy_json(const Grid<Action>& g) {
  json rows = json::array();
  for (int r = 0; r < g.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < g.cols(); ++c) row.push_back(std::string(to_string(g.at(r, c))));
    rows.push_back(std::move(row));
  }
  return rows;
}

json optional_json(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); }

json field_json(const RewardField& f) {
  return json{{"M", f.rows()}, {"N", f.cols()}, {"expanded", f.expanded}, {"rewards", grid_json(f.rewards)}};
}

json report_json(const RunReport& r) {
  json agents = json::array();
  for (const auto& a : r.agents) {
    agents.push_back({{"id", a.id},
                      {"row", a.pos.row},
                      {"col", a.pos.col},
                      {"energy", std::isfinite(a.energy) ? json(a.energy) : json(nullptr)}});
  }
  return json{{"stepsPolicy", optional_json(r.steps_to_policy_convergence)},
              {"stepsValue", optional_json(r.steps_to_value_convergence)},
              {"rounds", r.rounds},
              {"agentSteps", r.agent_steps},
              {"estimatedSeconds", r.estimated_seconds},
              {"visits", grid_json(r.visit_counts)},
              {"finalPolicy", policy_json(r.final_policy)},
              {"convergedPolicy", r.converged_policy.empty() ? json(nullptr) : policy_json(r.converged_policy)},
              {"agents", agents}};
}

template <typename T>
std::string grid_csv(const Grid<T>& g) {
  std::string out;
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      if (c) out += ',';
      if constexpr (std::is_floating_point_v<T>) {
        out += format_double(g.at(r, c));
      } else {
        out += std::to_string(g.at(r, c));
      }
    }
    out += '\n';
  }
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

std::string reward_field_to_csv(const RewardField& field) { return grid_csv(field.rewards); }

std::string reward_field_to_json(const RewardField& field) { return field_json(field).dump(2) + "\n"; }

RewardField reward_field_from_csv(std::string_view text, bool expanded) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ConfigError("reward CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("reward CSV line " + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("reward CSV is empty");
  RewardField f{Grid<double>(static_cast<int>(rows.size()), static_cast<int>(rows.front().size())), expanded};
  for (int r = 0; r < f.rows(); ++r) {
    for (int c = 0; c < f.cols(); ++c) f.rewards.at(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return f;
}

RewardField reward_field_from_json(std::string_view text) {
  const json j = parse_json(text);
  try {
    const int m = j.at("M").get<int>();
    const int n = j.at("N").get<int>();
    if (m <= 0 || n <= 0) throw ConfigError("reward JSON: M and N must be positive");
    RewardField f{Grid<double>(m, n), j.value("expanded", false)};
    const auto& rows = j.at("rewards");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(m)) throw ConfigError("reward JSON: expected M rows");
    for (int r = 0; r < m; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      if (!row.is_array() || row.size() != static_cast<std::size_t>(n)) throw ConfigError("reward JSON: expected N columns");
      for (int c = 0; c < n; ++c) f.rewards.at(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("reward JSON: ") + e.what());
  }
}

RewardField load_reward_field(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (path.extension() == ".json") return reward_field_from_json(text);
  return reward_field_from_csv(text, false);
}

std::string grid_to_csv(const Grid<double>& g) { return grid_csv(g); }
std::string grid_to_csv(const Grid<std::uint64_t>& g) { return grid_csv(g); }

std::string q_table_to_csv(const QSnapshot& q) {
  std::string out = "row,col,action,q\n";
  for (int r = 0; r < q.rows(); ++r) {
    for (int c = 0; c < q.cols(); ++c) {
      for (Action a : kActions) {
        out += std::to_string(r) + ',' + std::to_string(c) + ',' + std::string(to_string(a)) + ',' +
               format_double(q.at({r, c}, a)) + '\n';
      }
    }
  }
  return out;
}

std::string registry_to_csv(const SearchedRegistry& reg) {
  std::string out = "row,col,status,agent\n";
  for (int r = 0; r < reg.rows(); ++r) {
    for (int c = 0; c < reg.cols(); ++c) {
      const auto st = reg.status({r, c});
      const char* name = st == CellStatus::Searched ? "searched" : st == CellStatus::Claimed ? "claimed" : "free";
      const int owner = reg.owner({r, c});
      out += std::to_string(r) + ',' + std::to_string(c) + ',' + name + ',' + (owner < 0 ? "" : std::to_string(owner)) +
             '\n';
    }
  }
  return out;
}

std::string events_to_csv(std::span<const comms::ChannelEvent> events) {
  std::string out = "time,vehicle,event,detail\n";
  for (const auto& e : events) {
    out += format_double(e.time) + ',' + std::to_string(e.vehicle) + ',' + std::string(comms::to_string(e.type)) + ',' +
           e.detail + '\n';
  }
  return out;
}

std::string run_report_to_json(const RunReport& report) { return report_json(report).dump(2) + "\n"; }

std::string global_map_to_json(const GlobalMap& map) {
  json rois = json::array();
  for (const auto& r : map.rois) {
    json cells = json::array();
    for (const auto& c : r.cells) cells.push_back({c.row, c.col});
    rois.push_back({{"id", r.id}, {"cells", cells}, {"D", r.area}, {"Gamma", r.variation}, {"Lambda", r.priority}});
  }
  json assignments = json::array();
  for (const auto& a : map.assignments) assignments.push_back({{"roi", a.roi_id}, {"vehicles", a.vehicles}});
  json fine = json::array();
  for (const auto& f : map.fine) {
    json searches = json::array();
    for (const auto& [c, v] : f.search_log) searches.push_back({c.row, c.col, v});
    fine.push_back({{"roi", f.roi_id},
                    {"originRow", f.origin_row},
                    {"originCol", f.origin_col},
                    {"refinement", f.refinement},
                    {"expected", grid_json(f.expected)},
                    {"measured", grid_json(f.measured)},
                    {"searchedBy", grid_json(f.searched_by)},
                    {"inRoi", grid_json(f.in_roi)},
                    {"searches", searches}});
  }
  json j{{"aborted", map.aborted},
         {"abortReason", map.abort_reason},
         {"coarse", field_json(map.coarse)},
         {"coarseMean", grid_json(map.coarse_mean)},
         {"rois", rois},
         {"assignments", assignments},
         {"fine", fine},
         {"phase1", report_json(map.phase1)}};
  return j.dump(2) + "\n";
}

namespace {

json engine_json(const EngineConfig& c) {
  return json{{"agents", c.num_agents},
              {"tMin", c.temperature.v_min},
              {"tMax", c.temperature.v_max},
              {"tHalf", c.temperature.half_life},
              {"aMin", c.learning_rate.v_min},
              {"aMax", c.learning_rate.v_max},
              {"aHalf", c.learning_rate.half_life},
              {"gamma", c.gamma},
              {"maxSteps", c.max_steps},
              {"convergenceWindow", c.convergence_window},
              {"valueEps", c.value_eps},
              {"valueEpsMode", c.value_eps_mode == ValueEpsMode::Relative ? "relative" : "absolute"},
              {"clock", c.clock == ClockMode::Global ? "global" : "per-agent"},
              {"mode", c.schedule == ScheduleMode::Sequential ? "seq" : "conc"},
              {"seed", c.seed},
              {"runUntilValueConvergence", c.run_until_value_convergence},
              {"traffic", c.traffic == TrafficMode::Surface ? "surface" : "underwater"},
              {"underwaterWindow", c.underwater_window},
              {"energyBudget", c.energy_budget ? json(*c.energy_budget) : json(nullptr)},
              {"secondsPerStep", c.seconds_per_step}};
}

template <typename Enum>
void read_enum(const json& j, const char* key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> names) {
  if (!j.contains(key)) return;
  const std::string v = j.at(key).get<std::string>();
  for (const auto& [name, value] : names) {
    if (v == name) {
      out = value;
      return;
    }
  }
  throw ConfigError(std::string("unknown value '") + v + "' for '" + key + "'");
}

EngineConfig engine_from(const json& j, EngineConfig c) {
  if (!j.is_object()) throw ConfigError("engine config must be a JSON object");
  read_opt(j, "agents", c.num_agents);
  read_opt(j, "tMin", c.temperature.v_min);
  read_opt(j, "tMax", c.temperature.v_max);
  read_opt(j, "tHalf", c.temperature.half_life);
  read_opt(j, "aMin", c.learning_rate.v_min);
  read_opt(j, "aMax", c.learning_rate.v_max);
  read_opt(j, "aHalf", c.learning_rate.half_life);
  read_opt(j, "gamma", c.gamma);
  read_opt(j, "maxSteps", c.max_steps);
  read_opt(j, "convergenceWindow", c.convergence_window);
  read_opt(j, "valueEps", c.value_eps);
  read_enum(j, "valueEpsMode", c.value_eps_mode, {{"relative", ValueEpsMode::Relative}, {"absolute", ValueEpsMode::Absolute}});
  read_enum(j, "clock", c.clock, {{"global", ClockMode::Global}, {"per-agent", ClockMode::PerAgent}});
  read_enum(j, "mode", c.schedule, {{"seq", ScheduleMode::Sequential}, {"conc", ScheduleMode::Concurrent}});
  read_opt(j, "seed", c.seed);
  read_opt(j, "runUntilValueConvergence", c.run_until_value_convergence);
  read_enum(j, "traffic", c.traffic, {{"surface", TrafficMode::Surface}, {"underwater", TrafficMode::Underwater}});
  read_opt(j, "underwaterWindow", c.underwater_window);
  if (j.contains("energyBudget")) {
    if (j.at("energyBudget").is_null()) c.energy_budget.reset();
    else c.energy_budget = j.at("energyBudget").get<std::uint64_t>();
  }
  read_opt(j, "secondsPerStep", c.seconds_per_step);
  return c;
}

}  // namespace

std::string engine_config_to_json(const EngineConfig& cfg) { return engine_json(cfg).dump(2) + "\n"; }

EngineConfig engine_config_from_json(std::string_view text, EngineConfig base) {
  try {
    return engine_from(parse_json(text), std::move(base));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("engine config: ") + e.what());
  }
}

std::string mission_config_to_json(const MissionConfig& cfg) {
  json j{{"seed", cfg.seed},
         {"refinement", cfg.refinement},
         {"rewardThresholdPercentile", cfg.reward_threshold_percentile},
         {"weights",
          {{"mu", cfg.weights.mu},
           {"beta", cfg.weights.beta},
           {"psi", cfg.weights.psi},
           {"roiThresholdPercentile", cfg.weights.roi_threshold_percentile},
           {"energySign", cfg.weights.energy_sign == EnergySign::Minus ? "minus" : "plus"},
           {"normalize", cfg.weights.normalize}}},
         {"phase1", engine_json(cfg.phase1)},
         {"phase2", engine_json(cfg.phase2)},
         {"async",
          {{"slotLength", cfg.async.slot_length},
           {"backoffBound", cfg.async.backoff_bound},
           {"backoffCap", cfg.async.backoff_cap}}},
         {"sync", {{"window", cfg.sync.window}, {"slotLength", cfg.sync.slot_length}}}};
  return j.dump(2) + "\n";
}

MissionConfig mission_config_from_json(std::string_view text, MissionConfig cfg) {
  const json j = parse_json(text);
  if (!j.is_object()) throw ConfigError("mission config must be a JSON object");
  try {
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "refinement", cfg.refinement);
    read_opt(j, "rewardThresholdPercentile", cfg.reward_threshold_percentile);
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      read_opt(w, "mu", cfg.weights.mu);
      read_opt(w, "beta", cfg.weights.beta);
      read_opt(w, "psi", cfg.weights.psi);
      read_opt(w, "roiThresholdPercentile", cfg.weights.roi_threshold_percentile);
      read_enum(w, "energySign", cfg.weights.energy_sign, {{"minus", EnergySign::Minus}, {"plus", EnergySign::Plus}});
      read_opt(w, "normalize", cfg.weights.normalize);
    }
    if (j.contains("phase1")) cfg.phase1 = engine_from(j.at("phase1"), cfg.phase1);
    if (j.contains("phase2")) cfg.phase2 = engine_from(j.at("phase2"), cfg.phase2);
    if (j.contains("async")) {
      const auto& a = j.at("async");
      read_opt(a, "slotLength", cfg.async.slot_length);
      read_opt(a, "backoffBound", cfg.async.backoff_bound);
      read_opt(a, "backoffCap", cfg.async.backoff_cap);
    }
    if (j.contains("sync")) {
      const auto& s = j.at("sync");
      read_opt(s, "window", cfg.sync.window);
      read_opt(s, "slotLength", cfg.sync.slot_length);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mission config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace uwmarl::io
