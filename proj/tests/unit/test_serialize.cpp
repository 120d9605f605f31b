#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "uwmarl/harness.hpp"
#include "uwmarl/serialize.hpp"

using namespace uwmarl;

TEST(FormatDouble, RoundTripsAndNonFinite) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::format_double(NAN), "nan");
  EXPECT_EQ(io::format_double(-INFINITY), "-inf");
}

TEST(RewardFieldIo, CsvAndJsonRoundTrip) {
  const auto f = harness::reference_field(true);
  const auto c = io::reward_field_from_csv(io::reward_field_to_csv(f), true);
  EXPECT_EQ(c.rewards, f.rewards);
  const auto j = io::reward_field_from_json(io::reward_field_to_json(f));
  EXPECT_EQ(j.rewards, f.rewards);
  EXPECT_TRUE(j.expanded);
}

TEST(RewardFieldIo, JsonShape) {
  const auto text = io::reward_field_to_json(harness::reference_field(false));
  for (const char* key : {"\"M\"", "\"N\"", "\"expanded\"", "\"rewards\""}) EXPECT_NE(text.find(key), std::string::npos);
}

TEST(RewardFieldIo, RejectsRaggedCsv) {
  EXPECT_THROW(io::reward_field_from_csv("1,2\n3\n", false), ConfigError);
  EXPECT_THROW(io::reward_field_from_json("{\"M\":2}"), ConfigError);
}

TEST(Csv, QTableHeaderAndRows) {
  QTable q(2, 3);
  q.apply_update({1, 2}, Action::Up, 1.5, {0, 2}, 1.0, 0.9);
  const auto csv = io::q_table_to_csv(q.snapshot());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,col,action,q");
  EXPECT_NE(csv.find("1,2,Up,1.5\n"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3 * 4);
}

TEST(Csv, Registry) {
  SearchedRegistry reg(1, 3);
  reg.claim_cell({0, 0}, 4);
  reg.claim_cell({0, 1}, 2);
  reg.mark_searched({0, 1}, 2);
  EXPECT_EQ(io::registry_to_csv(reg), "row,col,status,agent\n0,0,claimed,4\n0,1,searched,2\n0,2,free,\n");
}

TEST(Csv, Events) {
  const std::vector<comms::ChannelEvent> ev{{1.5, 3, comms::EventType::Collided, "message 0"}};
  EXPECT_EQ(io::events_to_csv(ev), "time,vehicle,event,detail\n1.5,3,collided,message 0\n");
}

TEST(Config, EngineRoundTrip) {
  EngineConfig c;
  c.num_agents = 7;
  c.temperature.half_life = 300;
  c.schedule = ScheduleMode::Concurrent;
  c.energy_budget = 99;
  c.traffic = TrafficMode::Underwater;
  const auto back = io::engine_config_from_json(io::engine_config_to_json(c));
  EXPECT_EQ(io::engine_config_to_json(back), io::engine_config_to_json(c));
  EXPECT_EQ(back.num_agents, 7);
  EXPECT_EQ(back.energy_budget, std::optional<std::uint64_t>(99));
}

TEST(Config, PartialOverridesKeepBase) {
  const auto c = io::engine_config_from_json("{\"agents\": 3, \"mode\": \"conc\"}");
  EXPECT_EQ(c.num_agents, 3);
  EXPECT_EQ(c.schedule, ScheduleMode::Concurrent);
  EXPECT_EQ(c.gamma, 0.9);
  EXPECT_THROW(io::engine_config_from_json("{\"mode\": \"fast\"}"), ConfigError);
  EXPECT_THROW(io::engine_config_from_json("not json"), ConfigError);
}

TEST(Config, MissionRoundTrip) {
  MissionConfig m;
  m.weights.psi = 2.0;
  m.weights.energy_sign = EnergySign::Plus;
  m.sync.window = 12;
  m.async.backoff_bound = 8;
  const auto back = io::mission_config_from_json(io::mission_config_to_json(m));
  EXPECT_EQ(io::mission_config_to_json(back), io::mission_config_to_json(m));
  EXPECT_THROW(io::mission_config_from_json("{\"refinement\": 0}"), ConfigError);
}

TEST(Files, WriteCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "uwmarl_serialize_test";
  std::filesystem::remove_all(dir);
  io::write_file(dir / "a" / "b.txt", "hello");
  EXPECT_EQ(io::read_file(dir / "a" / "b.txt"), "hello");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(io::read_file(dir / "missing"), ConfigError);
}
