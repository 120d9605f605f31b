#pragma once

// Reference implementations that share no code with the library beyond plain
// data types. Slow and simple on purpose.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "uwmarl/grid.hpp"
#include "uwmarl/mdp.hpp"

namespace oracle {

using uwmarl::Action;
using uwmarl::Grid;
using uwmarl::GridPos;

inline GridPos move(int rows, int cols, GridPos s, int a) {
  static constexpr int dr[4] = {0, 0, -1, 1};
  static constexpr int dc[4] = {-1, 1, 0, 0};
  const GridPos n{s.row + dr[a], s.col + dc[a]};
  return (n.row < 0 || n.row >= rows || n.col < 0 || n.col >= cols) ? s : n;
}

// Solves (I - gamma P) v = r by Gaussian elimination with partial pivoting.
inline std::vector<double> evaluate(const Grid<double>& r, const std::vector<int>& policy, double gamma) {
  const int m = r.rows(), n = r.cols(), s = m * n;
  std::vector<std::vector<double>> a(s, std::vector<double>(s + 1, 0.0));
  for (int i = 0; i < s; ++i) {
    const GridPos p{i / n, i % n};
    const GridPos q = move(m, n, p, policy[i]);
    a[i][i] += 1.0;
    a[i][q.row * n + q.col] -= gamma;
    a[i][s] = r.at(p.row, p.col);
  }
  for (int c = 0; c < s; ++c) {
    int piv = c;
    for (int i = c + 1; i < s; ++i) {
      if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
    }
    std::swap(a[c], a[piv]);
    for (int i = 0; i < s; ++i) {
      if (i == c) continue;
      const double f = a[i][c] / a[c][c];
      for (int j = c; j <= s; ++j) a[i][j] -= f * a[c][j];
    }
  }
  std::vector<double> v(s);
  for (int i = 0; i < s; ++i) v[i] = a[i][s] / a[i][i];
  return v;
}

struct PolicySolution {
  std::vector<double> values;
  Grid<Action> greedy;
  // Smallest gap between the best and second-best distinct successor value.
  double min_gap = INFINITY;
};

// Policy iteration; greedy ties go to the lowest action index, and actions
// with identical successors are the same choice.
inline PolicySolution policy_iteration(const Grid<double>& r, double gamma) {
  const int m = r.rows(), n = r.cols(), s = m * n;
  std::vector<int> policy(s, 0);
  std::vector<double> v;
  for (int iter = 0; iter < 1000; ++iter) {
    v = evaluate(r, policy, gamma);
    bool stable = true;
    for (int i = 0; i < s; ++i) {
      const GridPos p{i / n, i % n};
      auto val = [&](int a) {
        const GridPos q = move(m, n, p, a);
        return v[q.row * n + q.col];
      };
      int best = policy[i];
      for (int a = 0; a < 4; ++a) {
        if (val(a) > val(best) + 1e-12 * std::max(1.0, std::abs(val(best)))) best = a;
      }
      if (best != policy[i]) {
        policy[i] = best;
        stable = false;
      }
    }
    if (stable) break;
  }
  PolicySolution out{v, Grid<Action>(m, n, Action::Left)};
  for (int i = 0; i < s; ++i) {
    const GridPos p{i / n, i % n};
    double best_v = -INFINITY;
    int best_a = 0;
    std::set<std::pair<int, int>> seen;
    std::vector<double> succ;
    for (int a = 0; a < 4; ++a) {
      const GridPos q = move(m, n, p, a);
      const double x = v[q.row * n + q.col];
      if (seen.insert({q.row, q.col}).second) succ.push_back(x);
      if (x > best_v) {
        best_v = x;
        best_a = a;
      }
    }
    std::sort(succ.rbegin(), succ.rend());
    if (succ.size() > 1) out.min_gap = std::min(out.min_gap, succ[0] - succ[1]);
    out.greedy.at(p.row, p.col) = static_cast<Action>(best_a);
  }
  return out;
}

// p-th percentile by linear interpolation between closest ranks, computed
// from counts rather than a sorted copy.
inline double percentile(const std::vector<double>& xs, double p) {
  const double h = (static_cast<double>(xs.size()) - 1.0) * p / 100.0;
  const auto k = static_cast<std::size_t>(std::floor(h));
  auto kth = [&](std::size_t k) {
    for (double x : xs) {
      std::size_t below = 0, equal = 0;
      for (double y : xs) {
        below += y < x;
        equal += y == x;
      }
      if (below <= k && k < below + equal) return x;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double lo = kth(k);
  if (k + 1 >= xs.size()) return lo;
  return lo + (h - static_cast<double>(k)) * (kth(k + 1) - lo);
}

// 4-connected components of cells >= the percentile threshold, via union-find.
inline std::set<std::set<GridPos>> hot_components(const Grid<double>& r, double pct) {
  const double thr = percentile(r.values(), pct);
  const int m = r.rows(), n = r.cols();
  std::vector<int> parent(static_cast<std::size_t>(m * n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto hot = [&](int i, int j) { return r.at(i, j) >= thr; };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!hot(i, j)) continue;
      if (i + 1 < m && hot(i + 1, j)) parent[find(i * n + j)] = find((i + 1) * n + j);
      if (j + 1 < n && hot(i, j + 1)) parent[find(i * n + j)] = find(i * n + j + 1);
    }
  }
  std::vector<std::set<GridPos>> groups(static_cast<std::size_t>(m * n));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (hot(i, j)) groups[find(i * n + j)].insert({i, j});
    }
  }
  std::set<std::set<GridPos>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.insert(g);
  }
  return out;
}

}  // namespace oracle
