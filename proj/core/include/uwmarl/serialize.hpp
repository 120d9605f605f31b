#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "uwmarl/comms.hpp"
#include "uwmarl/engine.hpp"
#include "uwmarl/mission.hpp"
#include "uwmarl/sensor_ingest.hpp"
#include "uwmarl/shared_q.hpp"

namespace uwmarl::io {

/// Shortest decimal that round-trips the double; "nan"/"inf" for non-finite values.
std::string format_double(double v);

/// M lines of N comma-separated rewards.
std::string reward_field_to_csv(const RewardField& field);
/// {"M":..,"N":..,"expanded":..,"rewards":[[..],..]}
std::string reward_field_to_json(const RewardField& field);
RewardField reward_field_from_csv(std::string_view text, bool expanded);
RewardField reward_field_from_json(std::string_view text);
/// Dispatches on extension: .json or .csv (csv fields are marked not expanded).
RewardField load_reward_field(const std::filesystem::path& path);

std::string grid_to_csv(const Grid<double>& g);
std::string grid_to_csv(const Grid<std::uint64_t>& g);

/// Columns row,col,action,q.
std::string q_table_to_csv(const QSnapshot& q);
/// Columns row,col,status,agent with status searched|claimed|free.
std::string registry_to_csv(const SearchedRegistry& reg);
/// Columns time,vehicle,event,detail.
std::string events_to_csv(std::span<const comms::ChannelEvent> events);

std::string run_report_to_json(const RunReport& report);
std::string global_map_to_json(const GlobalMap& map);

std::string engine_config_to_json(const EngineConfig& cfg);
/// Missing keys keep the values already in `base`. Throws ConfigError on bad JSON.
EngineConfig engine_config_from_json(std::string_view text, EngineConfig base = {});

std::string mission_config_to_json(const MissionConfig& cfg);
/// Missing keys keep the values already in `base`. Throws ConfigError on bad JSON.
MissionConfig mission_config_from_json(std::string_view text, MissionConfig base = {});

void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace uwmarl::io
