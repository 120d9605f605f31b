#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <vector>

#include "uwmarl/grid.hpp"
#include "uwmarl/mdp.hpp"
#include "uwmarl/policy.hpp"

namespace uwmarl {

/// Immutable point-in-time copy of a QTable.
class QSnapshot {
 public:
  QSnapshot() = default;
  QSnapshot(int rows, int cols, std::vector<double> q, std::uint64_t update_count);

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] std::uint64_t update_count() const { return update_count_; }
  [[nodiscard]] double at(const GridPos& s, Action a) const;
  [[nodiscard]] QRow row(const GridPos& s) const;
  [[nodiscard]] const std::vector<double>& values() const { return q_; }
  [[nodiscard]] double max_abs() const;

  friend bool operator==(const QSnapshot&, const QSnapshot&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> q_;
  std::uint64_t update_count_ = 0;
};

/// Q(s, a) <- Q(s, a) + alpha * (r + gamma * max_a' Q(s', a') - Q(s, a))
inline double q_learning_target(double q_sa, double r, double next_max, double alpha, double gamma) {
  return q_sa + alpha * (r + gamma * next_max - q_sa);
}

/// The team's shared action-value table, zero-initialised.
///
/// Each apply_update() holds the locks of both s and s' for the whole
/// read-modify-write, so every update is linearizable at entry-pair
/// granularity. Locks are always taken in ascending state index.
class QTable {
 public:
  QTable(int rows, int cols);

  QTable(const QTable&) = delete;
  QTable& operator=(const QTable&) = delete;

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }

  [[nodiscard]] QRow read_row(const GridPos& s) const;

  /// Returns the new Q(s, a). Throws std::invalid_argument for non-finite r,
  /// alpha outside (0, 1] or gamma outside [0, 1).
  double apply_update(const GridPos& s, Action a, double r, const GridPos& s_next, double alpha, double gamma);

  [[nodiscard]] QSnapshot snapshot() const;
  [[nodiscard]] std::uint64_t update_count() const;

 private:
  [[nodiscard]] std::size_t state_index(const GridPos& s) const;

  int rows_;
  int cols_;
  std::vector<double> q_;
  std::unique_ptr<std::mutex[]> locks_;
  mutable std::mutex count_lock_;
  std::uint64_t update_count_ = 0;
};

/// How an agent reads and writes Q-values. The direct view exposes the shared
/// table immediately; comms::BatchedQStore defers visibility to surfacing rounds.
class QStoreView {
 public:
  virtual ~QStoreView() = default;
  virtual QRow read_row(int agent, const GridPos& s) = 0;
  virtual double apply_update(int agent, const GridPos& s, Action a, double r, const GridPos& s_next, double alpha,
                              double gamma) = 0;
  /// Called once after every engine round (all agents stepped), single-threaded.
  virtual void end_round(std::uint64_t round) { (void)round; }
};

class DirectQView final : public QStoreView {
 public:
  explicit DirectQView(QTable& table) : table_(table) {}
  QRow read_row(int, const GridPos& s) override { return table_.read_row(s); }
  double apply_update(int, const GridPos& s, Action a, double r, const GridPos& s_next, double alpha,
                      double gamma) override {
    return table_.apply_update(s, a, r, s_next, alpha, gamma);
  }

 private:
  QTable& table_;
};

/// A Phase-2 cell operation without a matching claim.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class CellStatus { Free, Claimed, Searched };

/// Server-side record of which cells have been searched or are being searched.
class SearchedRegistry {
 public:
  SearchedRegistry(int rows, int cols);

  /// True iff c was neither searched nor claimed; the claim is then recorded.
  bool claim_cell(const GridPos& c, int agent);
  /// Moves c from claims to searched. Throws ProtocolError unless agent holds the claim.
  void mark_searched(const GridPos& c, int agent);

  [[nodiscard]] CellStatus status(const GridPos& c) const;
  /// Claimant or searcher of c, -1 when free.
  [[nodiscard]] int owner(const GridPos& c) const;
  [[nodiscard]] std::size_t searched_count() const;
  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }

 private:
  int rows_;
  int cols_;
  mutable std::mutex lock_;
  std::map<GridPos, int> claims_;
  std::map<GridPos, int> searched_;
};

}  // namespace uwmarl
