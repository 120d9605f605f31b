#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <set>
#include <thread>

#include "uwmarl/shared_q.hpp"

using namespace uwmarl;

namespace {

struct Update {
  GridPos s;
  Action a;
  double r;
  GridPos s_next;
  double alpha;
};

constexpr double kGamma = 0.9;

// Independent reference: plain array, row-major (row, col, action).
using Table = std::vector<double>;

void apply_ref(Table& t, int cols, const Update& u) {
  auto at = [&](GridPos p, std::size_t a) -> double& {
    return t[(static_cast<std::size_t>(p.row) * cols + p.col) * 4 + a];
  };
  double next_max = -INFINITY;
  for (std::size_t a = 0; a < 4; ++a) next_max = std::max(next_max, at(u.s_next, a));
  double& q = at(u.s, index_of(u.a));
  q = q + u.alpha * (u.r + kGamma * next_max - q);
}

// Every interleaving of two sequences of three, as a bitmask of which agent goes next.
std::set<Table> all_sequential_outcomes(const std::array<std::array<Update, 3>, 2>& ops, int rows, int cols) {
  std::set<Table> out;
  int orderings = 0;
  for (int mask = 0; mask < 64; ++mask) {
    if (__builtin_popcount(mask) != 3) continue;
    ++orderings;
    Table t(static_cast<std::size_t>(rows * cols * 4), 0.0);
    std::array<int, 2> next{0, 0};
    for (int k = 0; k < 6; ++k) {
      const int agent = (mask >> k) & 1;
      apply_ref(t, cols, ops[agent][next[agent]++]);
    }
    out.insert(t);
  }
  EXPECT_EQ(orderings, 20);
  return out;
}

}  // namespace

TEST(QUpdate, Examples) {
  QTable q(4, 4);
  EXPECT_EQ(q.apply_update({1, 1}, Action::Left, 0.0, {1, 0}, 0.5, 0.9), 0.0);
  EXPECT_EQ(q.apply_update({2, 2}, Action::Up, 1.0, {1, 2}, 1.0, 0.9), 1.0);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(q.apply_update({0, 0}, Action::Right, 3.5, {0, 1}, 1.0, 0.0), 3.5);
  EXPECT_EQ(q.read_row({0, 0})[index_of(Action::Right)], 3.5);
  EXPECT_EQ(q.update_count(), 7u);
}

TEST(QUpdate, RejectsBadParameters) {
  QTable q(2, 2);
  EXPECT_THROW(q.apply_update({0, 0}, Action::Left, NAN, {0, 0}, 0.5, 0.9), std::invalid_argument);
  EXPECT_THROW(q.apply_update({0, 0}, Action::Left, 1, {0, 0}, 0.0, 0.9), std::invalid_argument);
  EXPECT_THROW(q.apply_update({0, 0}, Action::Left, 1, {0, 0}, 1.5, 0.9), std::invalid_argument);
  EXPECT_THROW(q.apply_update({0, 0}, Action::Left, 1, {0, 0}, 0.5, 1.0), std::invalid_argument);
  EXPECT_EQ(q.update_count(), 0u);
}

TEST(QSnapshot, IsPointInTimeCopy) {
  QTable q(2, 2);
  q.apply_update({0, 0}, Action::Down, 2.0, {1, 0}, 1.0, 0.9);
  const auto snap = q.snapshot();
  q.apply_update({0, 0}, Action::Down, 5.0, {1, 0}, 1.0, 0.9);
  EXPECT_EQ(snap.at({0, 0}, Action::Down), 2.0);
  EXPECT_EQ(snap.update_count(), 1u);
  EXPECT_EQ(q.snapshot().at({0, 0}, Action::Down), 5.0);
}

TEST(Linearizability, SmallModelTwoAgentsThreeUpdates) {
  // Overlapping entries so that orderings give different tables.
  const std::array<std::array<Update, 3>, 2> ops{{
      {{{{0, 0}, Action::Right, 1.0, {0, 1}, 0.5},
        {{0, 1}, Action::Left, 2.0, {0, 0}, 0.5},
        {{0, 0}, Action::Right, 1.0, {0, 1}, 0.5}}},
      {{{{0, 1}, Action::Left, 3.0, {0, 0}, 0.75},
        {{0, 0}, Action::Down, 0.5, {1, 0}, 1.0},
        {{1, 0}, Action::Up, 4.0, {0, 0}, 0.25}}},
  }};
  const auto outcomes = all_sequential_outcomes(ops, 2, 2);
  ASSERT_GT(outcomes.size(), 5u);

  std::set<Table> observed;
  for (int trial = 0; trial < 2000; ++trial) {
    QTable q(2, 2);
    std::barrier start(2);
    auto worker = [&](int agent) {
      start.arrive_and_wait();
      for (const auto& u : ops[agent]) q.apply_update(u.s, u.a, u.r, u.s_next, u.alpha, kGamma);
    };
    {
      std::jthread a(worker, 0), b(worker, 1);
    }
    const auto snap = q.snapshot();
    ASSERT_EQ(snap.update_count(), 6u);
    ASSERT_TRUE(outcomes.contains(snap.values())) << "trial " << trial;
    observed.insert(snap.values());
  }
  EXPECT_GE(observed.size(), 1u);
}

TEST(Linearizability, NoLostUpdates) {
  QTable q(4, 4);
  constexpr int kThreads = 8;
  constexpr int kPerThread = 1000;
  std::barrier start(kThreads);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < kThreads; ++t) {
      pool.emplace_back([&] {
        start.arrive_and_wait();
        for (int i = 0; i < kPerThread; ++i) q.apply_update({2, 1}, Action::Up, 7.25, {1, 1}, 1.0, 0.0);
      });
    }
  }
  EXPECT_EQ(q.update_count(), 8000u);
  EXPECT_EQ(q.read_row({2, 1})[index_of(Action::Up)], 7.25);
}

TEST(Linearizability, CrossingUpdatesDoNotDeadlock) {
  // s and s' in opposite orders across threads exercises lock ordering.
  QTable q(1, 2);
  std::barrier start(2);
  {
    std::jthread a([&] {
      start.arrive_and_wait();
      for (int i = 0; i < 20000; ++i) q.apply_update({0, 0}, Action::Right, 1, {0, 1}, 0.1, 0.9);
    });
    std::jthread b([&] {
      start.arrive_and_wait();
      for (int i = 0; i < 20000; ++i) q.apply_update({0, 1}, Action::Left, 1, {0, 0}, 0.1, 0.9);
    });
  }
  EXPECT_EQ(q.update_count(), 40000u);
}

TEST(Registry, Examples) {
  SearchedRegistry reg(4, 4);
  EXPECT_TRUE(reg.claim_cell({0, 0}, 1));
  EXPECT_FALSE(reg.claim_cell({0, 0}, 2));
  EXPECT_EQ(reg.status({0, 0}), CellStatus::Claimed);
  EXPECT_THROW(reg.mark_searched({0, 0}, 2), ProtocolError);
  reg.mark_searched({0, 0}, 1);
  EXPECT_EQ(reg.status({0, 0}), CellStatus::Searched);
  EXPECT_FALSE(reg.claim_cell({0, 0}, 1));
  EXPECT_EQ(reg.owner({0, 0}), 1);
  EXPECT_EQ(reg.owner({1, 1}), -1);
  EXPECT_EQ(reg.searched_count(), 1u);
  EXPECT_THROW(reg.mark_searched({2, 2}, 0), ProtocolError);
}

TEST(Registry, ClaimStormHasOneWinner) {
  for (int round = 0; round < 200; ++round) {
    SearchedRegistry reg(2, 2);
    constexpr int kThreads = 8;
    std::atomic<int> winners{0};
    std::barrier start(kThreads);
    {
      std::vector<std::jthread> pool;
      for (int t = 0; t < kThreads; ++t) {
        pool.emplace_back([&, t] {
          start.arrive_and_wait();
          if (reg.claim_cell({1, 0}, t)) ++winners;
        });
      }
    }
    ASSERT_EQ(winners.load(), 1);
  }
}
