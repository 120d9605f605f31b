#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <limits>

#include "uwmarl/mdp.hpp"
#include "uwmarl/rng.hpp"

using namespace uwmarl;

namespace {

RewardField field_of(int rows, int cols, std::initializer_list<double> v) {
  RewardField f{Grid<double>(rows, cols), false};
  std::copy(v.begin(), v.end(), f.rewards.begin());
  return f;
}

RewardField random_field(Rng& rng, int rows, int cols) {
  RewardField f{Grid<double>(rows, cols), true};
  for (double& x : f.rewards) x = expand_variance(0.3 * rng.uniform());
  return f;
}

// Manhattan BFS distances on the clamped grid.
Grid<int> bfs(const GridWorld& w, GridPos goal) {
  Grid<int> d(w.rows(), w.cols(), -1);
  std::deque<GridPos> q{goal};
  d[goal] = 0;
  while (!q.empty()) {
    const GridPos p = q.front();
    q.pop_front();
    for (Action a : kActions) {
      const GridPos n = w.step(p, a);
      if (d[n] < 0) {
        d[n] = d[p] + 1;
        q.push_back(n);
      }
    }
  }
  return d;
}

}  // namespace

TEST(Step, Examples) {
  const GridWorld w(4, 4);
  EXPECT_EQ(w.step({0, 0}, Action::Left), (GridPos{0, 0}));
  EXPECT_EQ(w.step({1, 1}, Action::Right), (GridPos{1, 2}));
  EXPECT_EQ(w.step({3, 0}, Action::Down), (GridPos{3, 0}));
  EXPECT_EQ(w.step({1, 1}, Action::Up), (GridPos{0, 1}));
}

TEST(Step, TotalAndInBounds) {
  for (int m = 1; m <= 5; ++m) {
    for (int n = 1; n <= 5; ++n) {
      const GridWorld w(m, n);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) {
          for (Action a : kActions) {
            const GridPos p = w.step({r, c}, a);
            EXPECT_TRUE(w.contains(p));
            EXPECT_LE(std::abs(p.row - r) + std::abs(p.col - c), 1);
          }
        }
      }
    }
  }
}

TEST(Canonical, CornerStayTie) {
  const GridWorld w(4, 4);
  EXPECT_EQ(w.canonical({3, 0}, Action::Down), Action::Left);
  EXPECT_EQ(w.canonical({0, 0}, Action::Up), Action::Left);
  EXPECT_EQ(w.canonical({1, 1}, Action::Down), Action::Down);
}

TEST(Reward, Examples) {
  const RewardField zero{Grid<double>(4, 4, 0.0), false};
  EXPECT_EQ(reward(zero, {2, 1}), 0.0);
  Grid<CellStats> stats(4, 4);
  stats.at(0, 3) = {3, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(reward(build_reward_field(stats, true), {0, 3}), 100.0);
}

TEST(ActionNames, RoundTrip) {
  for (Action a : kActions) EXPECT_EQ(parse_action(to_string(a)), a);
  EXPECT_THROW(parse_action("North"), std::invalid_argument);
}

TEST(ValueIteration, UniformReward) {
  const RewardField f{Grid<double>(4, 4, 2.5), false};
  const auto sol = value_iteration({0.9, f}, 1e-10);
  for (double v : sol.values) EXPECT_NEAR(v, 25.0, 1e-8);
}

TEST(ValueIteration, GammaZeroIsReward) {
  const auto f = field_of(2, 3, {1, 2, 3, 4, 5, 6});
  const auto sol = value_iteration({0.0, f}, 1e-12);
  for (std::size_t i = 0; i < f.rewards.size(); ++i) EXPECT_DOUBLE_EQ(sol.values.values()[i], f.rewards.values()[i]);
}

TEST(ValueIteration, SingleHotCellGivesShortestPaths) {
  const GridWorld w(3, 3);
  for (int gr = 0; gr < 3; ++gr) {
    for (int gc = 0; gc < 3; ++gc) {
      RewardField f{Grid<double>(3, 3, 0.0), false};
      f.rewards.at(gr, gc) = 1.0;
      const auto sol = value_iteration({0.9, f}, 1e-12);
      const auto dist = bfs(w, {gr, gc});
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          const GridPos s{r, c};
          const GridPos next = w.step(s, sol.greedy[s]);
          if (dist[s] == 0) {
            EXPECT_LE(dist[next], 1) << "goal should stay or step next to itself";
          } else {
            EXPECT_EQ(dist[next], dist[s] - 1) << "from " << to_string(s) << " to goal " << to_string({gr, gc});
          }
        }
      }
    }
  }
}

TEST(ValueIteration, SweepOrderInvariant) {
  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto f = random_field(rng, 4, 4);
    const double tol = 1e-9;
    const auto j = value_iteration({0.9, f}, tol, SweepOrder::Jacobi);
    const auto g = value_iteration({0.9, f}, tol, SweepOrder::GaussSeidel);
    for (std::size_t i = 0; i < j.values.size(); ++i) {
      // Residual tol bounds the error by tol / (1 - gamma) on each side.
      EXPECT_NEAR(j.values.values()[i], g.values.values()[i], 2 * tol / (1 - 0.9));
    }
  }
}

TEST(ValueIteration, RewardScaling) {
  Rng rng(9);
  for (int k = 0; k < 10; ++k) {
    const auto f = random_field(rng, 4, 4);
    RewardField g = f;
    const double scale = 4.0;  // power of two keeps the scaling exact
    for (double& v : g.rewards) v *= scale;
    const auto a = value_iteration({0.9, f}, 1e-10);
    const auto b = value_iteration({0.9, g}, 1e-10 * scale);
    EXPECT_EQ(a.greedy, b.greedy);
    for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_EQ(b.values.values()[i], scale * a.values.values()[i]);
  }
}

TEST(MdpConfig, Validation) {
  const RewardField f{Grid<double>(2, 2, 1.0), false};
  EXPECT_THROW((MdpConfig{1.0, f}.validate()), ConfigError);
  EXPECT_THROW((MdpConfig{-0.1, f}.validate()), ConfigError);
  EXPECT_THROW((MdpConfig{0.9, RewardField{}}.validate()), ConfigError);
}

#include "oracles.hpp"

TEST(ValueIteration, MatchesPolicyIteration) {
  Rng rng(21);
  for (int k = 0; k < 20; ++k) {
    const auto f = random_field(rng, 3 + k % 3, 4);
    const auto vi = value_iteration({0.9, f}, 1e-11);
    const auto pi = oracle::policy_iteration(f.rewards, 0.9);
    for (std::size_t i = 0; i < pi.values.size(); ++i) EXPECT_NEAR(vi.values.values()[i], pi.values[i], 1e-8);
    if (pi.min_gap > 1e-6) EXPECT_EQ(vi.greedy, pi.greedy);
  }
}
