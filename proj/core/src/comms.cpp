#include "uwmarl/comms.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace uwmarl::comms {

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::Delivered: return "delivered";
    case EventType::Collided: return "collided";
    case EventType::BackoffScheduled: return "backoff-scheduled";
    case EventType::Surfaced: return "surfaced";
    case EventType::Submerged: return "submerged";
    case EventType::TokenGranted: return "token-granted";
    case EventType::SlotSkipped: return "slot-skipped";
  }
  return "?";
}

std::size_t count_events(std::span<const ChannelEvent> log, EventType type) {
  return static_cast<std::size_t>(
      std::count_if(log.begin(), log.end(), [type](const ChannelEvent& e) { return e.type == type; }));
}

void AsyncConfig::validate() const {
  if (!(slot_length > 0.0)) throw ConfigError("slot length must be positive");
  if (backoff_bound < 1) throw ConfigError("backoff bound must be at least 1");
  if (backoff_cap < backoff_bound) throw ConfigError("backoff cap must be >= backoff bound");
}

void SyncConfig::validate() const {
  if (!(window > 0.0)) throw ConfigError("sync window must be positive");
  if (!(slot_length > 0.0)) throw ConfigError("slot length must be positive");
}

AsyncResult async_broadcast(std::span<const int> vehicles, std::span<const Message> messages, Rng& rng,
                            const AsyncConfig& cfg) {
  cfg.validate();
  const std::set<int> known(vehicles.begin(), vehicles.end());

  // Per-vehicle FIFO of message indices in send-time order.
  std::map<int, std::deque<std::size_t>> queues;
  {
    std::vector<std::size_t> order(messages.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return messages[a].send_time < messages[b].send_time; });
    for (std::size_t i : order) {
      const auto& m = messages[i];
      if (!known.contains(m.sender)) {
        throw std::invalid_argument("message sender " + std::to_string(m.sender) + " is not an active vehicle");
      }
      if (!(m.send_time >= 0.0) || !std::isfinite(m.send_time)) {
        throw std::invalid_argument("message send time must be finite and non-negative");
      }
      queues[m.sender].push_back(i);
    }
  }

  AsyncResult out;
  out.attempts.assign(messages.size(), 0);

  struct Pending {
    std::uint64_t slot;
    int vehicle;
    bool operator>(const Pending& o) const { return slot != o.slot ? slot > o.slot : vehicle > o.vehicle; }
  };
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> agenda;
  std::map<int, int> streak;  // consecutive collisions per vehicle

  auto ready_slot = [&](std::size_t msg) {
    return static_cast<std::uint64_t>(std::floor(messages[msg].send_time / cfg.slot_length));
  };
  for (auto& [v, q] : queues) agenda.push({ready_slot(q.front()), v});

  while (!agenda.empty()) {
    const std::uint64_t slot = agenda.top().slot;
    if (slot > cfg.max_slots) throw std::logic_error("async_broadcast exceeded the slot limit");
    std::vector<int> senders;
    while (!agenda.empty() && agenda.top().slot == slot) {
      senders.push_back(agenda.top().vehicle);
      agenda.pop();
    }
    const double time = static_cast<double>(slot) * cfg.slot_length;

    if (senders.size() == 1) {
      const int v = senders.front();
      auto& q = queues[v];
      const std::size_t msg = q.front();
      ++out.attempts[msg];
      q.pop_front();
      ++out.delivered;
      streak[v] = 0;
      out.events.push_back({time, v, EventType::Delivered, "message " + std::to_string(msg)});
      out.finish_time = time + cfg.slot_length;
      if (!q.empty()) agenda.push({std::max(slot + 1, ready_slot(q.front())), v});
      continue;
    }

    for (int v : senders) {
      const std::size_t msg = queues[v].front();
      ++out.attempts[msg];
      ++out.collisions;
      out.events.push_back({time, v, EventType::Collided, "message " + std::to_string(msg)});
    }
    for (int v : senders) {
      const int k = ++streak[v];
      // B_k = min(B * 2^(k-1), cap); the shift is bounded so it cannot overflow.
      const std::uint64_t bound = std::min<std::uint64_t>(
          static_cast<std::uint64_t>(cfg.backoff_bound) << std::min(k - 1, 32), static_cast<std::uint64_t>(cfg.backoff_cap));
      const std::uint64_t delay = rng.uniform_int(1, bound);
      agenda.push({slot + delay, v});
      out.events.push_back({time, v, EventType::BackoffScheduled,
                            "retry in " + std::to_string(delay) + " slot(s), bound " + std::to_string(bound)});
    }
  }
  return out;
}

std::vector<ChannelEvent> sync_round(std::span<const VehicleStatus> vehicles, const SyncConfig& cfg,
                                     std::uint64_t round) {
  cfg.validate();
  std::vector<VehicleStatus> order(vehicles.begin(), vehicles.end());
  std::sort(order.begin(), order.end(), [](const VehicleStatus& a, const VehicleStatus& b) { return a.id < b.id; });

  const auto r = static_cast<double>(round);
  const double boundary = (r + 1.0) * cfg.window + r * static_cast<double>(order.size()) * cfg.slot_length;
  std::vector<ChannelEvent> log;
  for (const auto& v : order) {
    if (v.operational) log.push_back({boundary, v.id, EventType::Surfaced, ""});
  }
  double t = boundary;
  for (const auto& v : order) {
    if (!v.operational) {
      log.push_back({t, v.id, EventType::SlotSkipped, "vehicle depleted"});
      continue;
    }
    log.push_back({t, v.id, EventType::TokenGranted, ""});
    log.push_back({t, v.id, EventType::Delivered, "data"});
    t += cfg.slot_length;
  }
  for (const auto& v : order) {
    if (v.operational) log.push_back({t, v.id, EventType::Submerged, ""});
  }
  return log;
}

std::vector<std::uint64_t> route_marl_traffic(TrafficMode mode, std::span<const MarlUpdateEvent> events, int window) {
  if (mode == TrafficMode::Underwater && window < 1) throw std::invalid_argument("window must be positive");
  std::vector<std::uint64_t> visible;
  visible.reserve(events.size());
  for (const auto& e : events) {
    if (mode == TrafficMode::Surface) {
      visible.push_back(e.round);
    } else {
      const auto w = static_cast<std::uint64_t>(window);
      visible.push_back((e.round + w - 1) / w * w);
    }
  }
  return visible;
}

BatchedQStore::BatchedQStore(QTable& shared, int agents, int window_rounds)
    : shared_(shared), window_(window_rounds), views_(static_cast<std::size_t>(agents)) {
  if (agents < 1) throw std::invalid_argument("BatchedQStore needs at least one agent");
  if (window_rounds < 1) throw std::invalid_argument("BatchedQStore window must be positive");
  refresh_views();
}

void BatchedQStore::refresh_views() {
  const QSnapshot snap = shared_.snapshot();
  for (auto& v : views_) {
    v.q = snap.values();
    v.pending.clear();
  }
}

QRow BatchedQStore::read_row(int agent, const GridPos& s) {
  const auto& q = views_.at(static_cast<std::size_t>(agent)).q;
  const std::size_t base = (static_cast<std::size_t>(s.row) * static_cast<std::size_t>(shared_.cols()) +
                            static_cast<std::size_t>(s.col)) *
                           kActionCount;
  QRow r{};
  std::copy_n(q.begin() + static_cast<std::ptrdiff_t>(base), kActionCount, r.begin());
  return r;
}

double BatchedQStore::apply_update(int agent, const GridPos& s, Action a, double r, const GridPos& s_next,
                                   double alpha, double gamma) {
  if (!std::isfinite(r)) throw std::invalid_argument("Q update: reward must be finite");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("Q update: alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("Q update: gamma must lie in [0, 1)");

  auto& view = views_.at(static_cast<std::size_t>(agent));
  const auto cols = static_cast<std::size_t>(shared_.cols());
  const std::size_t i = static_cast<std::size_t>(s.row) * cols + static_cast<std::size_t>(s.col);
  const std::size_t j = static_cast<std::size_t>(s_next.row) * cols + static_cast<std::size_t>(s_next.col);
  double next_max = view.q[j * kActionCount];
  for (std::size_t b = 1; b < kActionCount; ++b) next_max = std::max(next_max, view.q[j * kActionCount + b]);
  double& entry = view.q[i * kActionCount + index_of(a)];
  entry = q_learning_target(entry, r, next_max, alpha, gamma);
  view.pending.push_back({s, a, r, s_next, alpha, gamma});
  return entry;
}

void BatchedQStore::end_round(std::uint64_t round) {
  if (round % static_cast<std::uint64_t>(window_) == 0) surface();
}

void BatchedQStore::surface() {
  for (const auto& view : views_) {
    for (const auto& u : view.pending) shared_.apply_update(u.s, u.a, u.r, u.s_next, u.alpha, u.gamma);
  }
  refresh_views();
  ++surfacings_;
}

std::size_t BatchedQStore::pending() const {
  std::size_t n = 0;
  for (const auto& v : views_) n += v.pending.size();
  return n;
}

}  // namespace uwmarl::comms
