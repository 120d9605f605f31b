#include "uwmarl/shared_q.hpp"

#include <algorithm>
#include <cmath>

namespace uwmarl {

QSnapshot::QSnapshot(int rows, int cols, std::vector<double> q, std::uint64_t update_count)
    : rows_(rows), cols_(cols), q_(std::move(q)), update_count_(update_count) {
  if (q_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * kActionCount) {
    throw std::invalid_argument("QSnapshot: value count does not match dimensions");
  }
}

double QSnapshot::at(const GridPos& s, Action a) const {
  return q_.at((static_cast<std::size_t>(s.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(s.col)) *
                   kActionCount +
               index_of(a));
}

QRow QSnapshot::row(const GridPos& s) const {
  QRow r{};
  for (Action a : kActions) r[index_of(a)] = at(s, a);
  return r;
}

double QSnapshot::max_abs() const {
  double m = 0.0;
  for (double v : q_) m = std::max(m, std::abs(v));
  return m;
}

QTable::QTable(int rows, int cols)
    : rows_(rows),
      cols_(cols),
      q_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * kActionCount, 0.0),
      locks_(std::make_unique<std::mutex[]>(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))) {
  if (rows <= 0 || cols <= 0) throw ConfigError("Q-table needs positive dimensions");
}

std::size_t QTable::state_index(const GridPos& s) const {
  if (s.row < 0 || s.row >= rows_ || s.col < 0 || s.col >= cols_) {
    throw std::out_of_range("state " + to_string(s) + " outside the Q-table");
  }
  return static_cast<std::size_t>(s.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(s.col);
}

QRow QTable::read_row(const GridPos& s) const {
  const std::size_t i = state_index(s);
  std::lock_guard lock(locks_[i]);
  QRow r{};
  std::copy_n(q_.begin() + static_cast<std::ptrdiff_t>(i * kActionCount), kActionCount, r.begin());
  return r;
}

double QTable::apply_update(const GridPos& s, Action a, double r, const GridPos& s_next, double alpha, double gamma) {
  if (!std::isfinite(r)) throw std::invalid_argument("Q update: reward must be finite");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("Q update: alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("Q update: gamma must lie in [0, 1)");

  const std::size_t i = state_index(s);
  const std::size_t j = state_index(s_next);
  std::unique_lock first(locks_[std::min(i, j)]);
  std::unique_lock<std::mutex> second;
  if (i != j) second = std::unique_lock(locks_[std::max(i, j)]);

  double next_max = q_[j * kActionCount];
  for (std::size_t b = 1; b < kActionCount; ++b) next_max = std::max(next_max, q_[j * kActionCount + b]);
  double& entry = q_[i * kActionCount + index_of(a)];
  entry = q_learning_target(entry, r, next_max, alpha, gamma);
  const double result = entry;
  {
    std::lock_guard count(count_lock_);
    ++update_count_;
  }
  return result;
}

QSnapshot QTable::snapshot() const {
  const std::size_t n = static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
  std::vector<std::unique_lock<std::mutex>> held;
  held.reserve(n);
  for (std::size_t i = 0; i < n; ++i) held.emplace_back(locks_[i]);
  std::lock_guard count(count_lock_);
  return QSnapshot(rows_, cols_, q_, update_count_);
}

std::uint64_t QTable::update_count() const {
  std::lock_guard count(count_lock_);
  return update_count_;
}

SearchedRegistry::SearchedRegistry(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw ConfigError("registry needs positive dimensions");
}

bool SearchedRegistry::claim_cell(const GridPos& c, int agent) {
  std::lock_guard lock(lock_);
  if (searched_.contains(c) || claims_.contains(c)) return false;
  claims_.emplace(c, agent);
  return true;
}

void SearchedRegistry::mark_searched(const GridPos& c, int agent) {
  std::lock_guard lock(lock_);
  auto it = claims_.find(c);
  if (it == claims_.end() || it->second != agent) {
    throw ProtocolError("agent " + std::to_string(agent) + " does not hold the claim on " + to_string(c));
  }
  claims_.erase(it);
  searched_.emplace(c, agent);
}

CellStatus SearchedRegistry::status(const GridPos& c) const {
  std::lock_guard lock(lock_);
  if (searched_.contains(c)) return CellStatus::Searched;
  if (claims_.contains(c)) return CellStatus::Claimed;
  return CellStatus::Free;
}

int SearchedRegistry::owner(const GridPos& c) const {
  std::lock_guard lock(lock_);
  if (auto it = searched_.find(c); it != searched_.end()) return it->second;
  if (auto it = claims_.find(c); it != claims_.end()) return it->second;
  return -1;
}

std::size_t SearchedRegistry::searched_count() const {
  std::lock_guard lock(lock_);
  return searched_.size();
}

}  // namespace uwmarl
