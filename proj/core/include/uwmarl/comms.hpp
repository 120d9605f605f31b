#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uwmarl/engine.hpp"
#include "uwmarl/rng.hpp"
#include "uwmarl/shared_q.hpp"

namespace uwmarl::comms {

enum class MessageKind { Request, Data };

struct Message {
  int sender = 0;
  MessageKind kind = MessageKind::Data;
  std::vector<std::uint8_t> payload;
  double send_time = 0.0;  // simulated seconds
};

enum class EventType { Delivered, Collided, BackoffScheduled, Surfaced, Submerged, TokenGranted, SlotSkipped };

std::string_view to_string(EventType t);

struct ChannelEvent {
  double time = 0.0;
  int vehicle = 0;
  EventType type = EventType::Delivered;
  std::string detail;
};

std::size_t count_events(std::span<const ChannelEvent> log, EventType type);

// ---------------------------------------------------------------------------
// Asynchronous surface mode: slotted request/data handshake with random backoff.

struct AsyncConfig {
  double slot_length = 1.0;  // one request+data exchange
  int backoff_bound = 4;     // B: first retry waits uniform [1, B] slots
  int backoff_cap = 64;      // B doubles per consecutive collision up to this
  /// Hard stop against a broken configuration; never reached with B >= 2.
  std::uint64_t max_slots = 10'000'000;

  void validate() const;
};

struct AsyncResult {
  std::vector<ChannelEvent> events;
  /// Attempts per input message, same order as the input.
  std::vector<int> attempts;
  std::size_t delivered = 0;
  std::size_t collisions = 0;
  double finish_time = 0.0;
};

/// Every sender must appear in `vehicles`. A vehicle transmits its messages in
/// send-time order, one attempt per slot at most. Two or more attempts in one
/// slot all collide; each collided sender schedules a retry after a uniform
/// backoff in [1, B_k] slots, B_k = min(B * 2^(k-1), cap) after its k-th
/// consecutive collision.
AsyncResult async_broadcast(std::span<const int> vehicles, std::span<const Message> messages, Rng& rng,
                            const AsyncConfig& cfg = {});

// ---------------------------------------------------------------------------
// Synchronous underwater mode: periodic surfacing with an ID-ordered token.

struct SyncConfig {
  double window = 6.0;       // seconds of underwater work between surfacings
  double slot_length = 1.0;  // one token slot
  void validate() const;
};

struct VehicleStatus {
  int id = 0;
  bool operational = true;  // false once energy is exhausted
};

/// One surfacing round at the end of underwater window `round`. A cycle is the
/// window plus one token slot per listed vehicle, so round r surfaces at
/// (r + 1) * window + r * V * slot_length.
/// Operational vehicles surface, receive the token in ascending id and each
/// deliver one data frame; then all submerge. Depleted vehicles get a
/// SlotSkipped event instead.
std::vector<ChannelEvent> sync_round(std::span<const VehicleStatus> vehicles, const SyncConfig& cfg,
                                     std::uint64_t round);

// ---------------------------------------------------------------------------
// Visibility of Q-updates under each traffic mode.

struct MarlUpdateEvent {
  int agent = 0;
  std::uint64_t round = 0;  // 1-based engine round in which the update happened
};

/// Round from which each update is visible to other agents: the same round in
/// surface mode, the next surfacing round (next multiple of window) underwater.
std::vector<std::uint64_t> route_marl_traffic(TrafficMode mode, std::span<const MarlUpdateEvent> events, int window);

/// Underwater QStoreView. Each agent works on a private copy of the table taken
/// at the last surfacing plus its own updates; queued updates are replayed onto
/// the shared table in ascending agent id when the window closes.
class BatchedQStore final : public QStoreView {
 public:
  BatchedQStore(QTable& shared, int agents, int window_rounds);

  QRow read_row(int agent, const GridPos& s) override;
  double apply_update(int agent, const GridPos& s, Action a, double r, const GridPos& s_next, double alpha,
                      double gamma) override;
  void end_round(std::uint64_t round) override;

  /// Flush pending updates now (also done by end_round at window boundaries).
  void surface();
  [[nodiscard]] std::uint64_t surfacings() const { return surfacings_; }
  [[nodiscard]] std::size_t pending() const;

 private:
  struct PendingUpdate {
    GridPos s;
    Action a;
    double r;
    GridPos s_next;
    double alpha;
    double gamma;
  };
  struct LocalView {
    std::vector<double> q;
    std::vector<PendingUpdate> pending;
  };

  void refresh_views();

  QTable& shared_;
  int window_;
  std::vector<LocalView> views_;
  std::uint64_t surfacings_ = 0;
};

}  // namespace uwmarl::comms
