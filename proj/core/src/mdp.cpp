#include "uwmarl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uwmarl {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Left: return "Left";
    case Action::Right: return "Right";
    case Action::Up: return "Up";
    case Action::Down: return "Down";
  }
  return "?";
}

Action parse_action(std::string_view name) {
  for (Action a : kActions) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown action '" + std::string(name) + "'");
}

GridWorld::GridWorld(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw ConfigError("grid world needs positive dimensions");
}

GridPos GridWorld::step(const GridPos& s, Action a) const {
  GridPos n = s;
  switch (a) {
    case Action::Left: --n.col; break;
    case Action::Right: ++n.col; break;
    case Action::Up: --n.row; break;
    case Action::Down: ++n.row; break;
  }
  return contains(n) ? n : s;
}

Action GridWorld::canonical(const GridPos& s, Action a) const {
  const GridPos target = step(s, a);
  for (Action b : kActions) {
    if (step(s, b) == target) return b;
  }
  return a;
}

void MdpConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (rewards.rewards.empty()) throw ConfigError("reward field is empty");
}

double reward(const RewardField& field, const GridPos& s) { return field.rewards[s]; }

ValueSolution value_iteration(const MdpConfig& cfg, double tol, SweepOrder order) {
  cfg.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");

  const GridWorld world(cfg.rewards.rows(), cfg.rewards.cols());
  const auto& r = cfg.rewards.rewards;
  Grid<double> v(world.rows(), world.cols(), 0.0);

  auto backup = [&](const Grid<double>& src, const GridPos& s) {
    double best = -std::numeric_limits<double>::infinity();
    for (Action a : kActions) best = std::max(best, src[world.step(s, a)]);
    return r[s] + cfg.gamma * best;
  };

  ValueSolution out;
  auto residual = [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(backup(v, v.pos(i)) - v.values()[i]));
    return worst;
  };

  while (true) {
    if (order == SweepOrder::Jacobi) {
      Grid<double> next(world.rows(), world.cols(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) {
        const GridPos s = v.pos(i);
        next[s] = backup(v, s);
      }
      v = std::move(next);
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const GridPos s = v.pos(i);
        v[s] = backup(v, s);
      }
    }
    ++out.iterations;
    // The cap only matters when tol is below the floating-point resolution of V.
    if (residual() < tol || out.iterations >= 1'000'000) break;
  }

  out.greedy = Grid<Action>(world.rows(), world.cols(), Action::Left);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const GridPos s = v.pos(i);
    Action best = Action::Left;
    double best_v = -std::numeric_limits<double>::infinity();
    for (Action a : kActions) {
      const double nv = v[world.step(s, a)];
      if (nv > best_v) {
        best_v = nv;
        best = a;
      }
    }
    out.greedy[s] = best;
  }
  out.values = std::move(v);
  return out;
}

}  // namespace uwmarl
