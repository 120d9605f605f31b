#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "uwmarl/grid.hpp"
#include "uwmarl/mdp.hpp"
#include "uwmarl/policy.hpp"
#include "uwmarl/rng.hpp"
#include "uwmarl/sensor_ingest.hpp"
#include "uwmarl/shared_q.hpp"

namespace uwmarl {

struct AgentState {
  int id = 0;
  GridPos pos;
  double energy = 0.0;
  double reward_threshold = 0.0;
  Rng rng;

  [[nodiscard]] bool active() const { return energy > 0.0; }
};

/// Which counter drives the temperature and learning-rate schedules.
/// Global: one team clock advanced by every agent action.
/// PerAgent: each agent's own action count.
enum class ClockMode { Global, PerAgent };
enum class ScheduleMode { Sequential, Concurrent };
/// Value convergence compares max |dQ| against value_eps either directly or
/// divided by max |Q| (scale-free, so fields of different magnitude compare).
enum class ValueEpsMode { Absolute, Relative };
/// Surface: Q-updates are visible immediately. Underwater: batched until the
/// next surfacing round, every underwater_window rounds.
enum class TrafficMode { Surface, Underwater };

struct EngineConfig {
  int num_agents = 1;
  DecaySchedule temperature = kDefaultTemperature;
  DecaySchedule learning_rate = kDefaultLearningRate;
  double gamma = 0.9;
  /// Upper bound on rounds. One round = every active agent takes one action.
  std::uint64_t max_steps = 200'000;
  /// Policy: number of identical consecutive per-sweep snapshots.
  /// Value: the same span measured in agent-steps (W * M * N).
  int convergence_window = 10;
  double value_eps = 1e-4;
  ValueEpsMode value_eps_mode = ValueEpsMode::Relative;
  ClockMode clock = ClockMode::Global;
  ScheduleMode schedule = ScheduleMode::Sequential;
  std::uint64_t seed = 0;
  /// Keep running after policy convergence until values converge as well.
  bool run_until_value_convergence = true;
  TrafficMode traffic = TrafficMode::Surface;
  int underwater_window = 16;
  /// Per-agent step budget; unset means unlimited.
  std::optional<std::uint64_t> energy_budget;
  /// Explicit start cells; empty means random distinct cells drawn from seed.
  std::vector<GridPos> start_positions;
  double seconds_per_step = 6.0;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

struct RunReport {
  std::optional<std::uint64_t> steps_to_policy_convergence;
  std::optional<std::uint64_t> steps_to_value_convergence;
  Grid<std::uint64_t> visit_counts;
  QSnapshot final_q;
  /// Greedy policy when policy convergence was declared (empty otherwise).
  Grid<Action> converged_policy;
  Grid<Action> final_policy;
  std::uint64_t rounds = 0;
  std::uint64_t agent_steps = 0;
  std::vector<AgentState> agents;
  double estimated_seconds = 0.0;

  [[nodiscard]] bool policy_converged() const { return steps_to_policy_convergence.has_value(); }
  [[nodiscard]] bool value_converged() const { return steps_to_value_convergence.has_value(); }
};

/// argmax_a Q(s, a) per state, ties to the earliest action, then mapped to the
/// canonical action with the same successor.
Grid<Action> greedy_policy(const QSnapshot& q, const GridWorld& world);

/// True iff the last `window` snapshots exist and are all identical.
bool policy_converged(std::span<const Grid<Action>> history, int window);

/// True iff the last `window` deltas exist and all are below eps.
bool value_converged(std::span<const double> deltas, std::size_t window, double eps);

/// counts / sum * 100. Throws std::invalid_argument when every count is zero.
Grid<double> visit_percentages(const Grid<std::uint64_t>& counts);

/// Distinct uniformly random cells while count <= rows*cols; beyond that the
/// extra agents start on uniformly random (possibly shared) cells.
std::vector<GridPos> random_start_positions(int rows, int cols, int count, Rng& rng);

RunReport run(const RewardField& field, const EngineConfig& cfg);

}  // namespace uwmarl
