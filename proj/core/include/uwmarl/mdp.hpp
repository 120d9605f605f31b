#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "uwmarl/grid.hpp"
#include "uwmarl/sensor_ingest.hpp"

namespace uwmarl {

enum class Action : std::uint8_t { Left = 0, Right = 1, Up = 2, Down = 3 };

inline constexpr std::size_t kActionCount = 4;
/// Canonical order; also the argmax tie-break order.
inline constexpr std::array<Action, kActionCount> kActions{Action::Left, Action::Right, Action::Up, Action::Down};

constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }
std::string_view to_string(Action a);
/// Accepts the names produced by to_string(Action). Throws std::invalid_argument otherwise.
Action parse_action(std::string_view name);

/// Deterministic grid-world dynamics. Moves that would leave the grid are no-ops.
class GridWorld {
 public:
  GridWorld(int rows, int cols);

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] int state_count() const { return rows_ * cols_; }
  [[nodiscard]] bool contains(const GridPos& p) const {
    return p.row >= 0 && p.row < rows_ && p.col >= 0 && p.col < cols_;
  }

  [[nodiscard]] GridPos step(const GridPos& s, Action a) const;

  /// First action in kActions order whose successor equals step(s, a).
  /// Actions with the same successor are indistinguishable in this MDP
  /// (e.g. Left and Up both stay put in the top-left corner).
  [[nodiscard]] Action canonical(const GridPos& s, Action a) const;

 private:
  int rows_;
  int cols_;
};

struct MdpConfig {
  double gamma = 0.9;
  RewardField rewards;

  /// Throws ConfigError unless 0 <= gamma < 1 and the field is non-empty.
  void validate() const;
};

/// Reward for occupying s; granted for the state being departed.
double reward(const RewardField& field, const GridPos& s);

enum class SweepOrder { Jacobi, GaussSeidel };

struct ValueSolution {
  Grid<double> values;
  Grid<Action> greedy;
  int iterations = 0;
};

/// Solves V(s) = r(s) + gamma * max_a V(step(s, a)) until the Bellman residual
/// is below tol in the sup norm. greedy[s] = argmax_a V(step(s, a)) with ties
/// going to the earliest action in kActions order.
ValueSolution value_iteration(const MdpConfig& cfg, double tol, SweepOrder order = SweepOrder::Jacobi);

}  // namespace uwmarl
