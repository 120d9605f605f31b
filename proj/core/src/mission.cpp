#include "uwmarl/mission.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace uwmarl {

void AssignmentWeights::validate() const {
  if (!(mu >= 0.0) || !(beta >= 0.0) || !(psi >= 0.0)) throw ConfigError("mu, beta and psi must be non-negative");
  if (!(mu + beta > 0.0)) throw ConfigError("mu + beta must be positive");
  if (!(roi_threshold_percentile > 0.0 && roi_threshold_percentile < 100.0)) {
    throw ConfigError("RoI threshold percentile must lie in (0, 100)");
  }
}

void MissionConfig::validate() const {
  weights.validate();
  phase1.validate();
  phase2.validate();
  if (refinement < 1) throw ConfigError("refinement factor must be at least 1");
  if (!(reward_threshold_percentile >= 0.0 && reward_threshold_percentile <= 100.0)) {
    throw ConfigError("reward threshold percentile must lie in [0, 100]");
  }
  async.validate();
  sync.validate();
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<RegionOfInterest> detect_rois(const RewardField& coarse, const GridSpec& spec,
                                          const AssignmentWeights& weights) {
  spec.validate();
  if (coarse.rewards.empty()) throw ConfigError("coarse map is empty");
  if (coarse.rows() != spec.rows || coarse.cols() != spec.cols) {
    throw ConfigError("coarse map dimensions do not match the grid");
  }
  const double threshold = percentile(coarse.rewards.values(), weights.roi_threshold_percentile);

  const auto& r = coarse.rewards;
  Grid<int> label(r.rows(), r.cols(), 0);
  std::vector<RegionOfInterest> rois;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const GridPos seed = r.pos(i);
    if (r[seed] < threshold || label[seed] != 0) continue;

    RegionOfInterest roi;
    roi.id = static_cast<int>(rois.size()) + 1;
    std::deque<GridPos> frontier{seed};
    label[seed] = roi.id;
    while (!frontier.empty()) {
      const GridPos c = frontier.front();
      frontier.pop_front();
      roi.cells.push_back(c);
      const GridPos around[] = {{c.row, c.col - 1}, {c.row, c.col + 1}, {c.row - 1, c.col}, {c.row + 1, c.col}};
      for (const GridPos& n : around) {
        if (r.contains(n) && label[n] == 0 && r[n] >= threshold) {
          label[n] = roi.id;
          frontier.push_back(n);
        }
      }
    }
    std::sort(roi.cells.begin(), roi.cells.end());
    double sum = 0.0;
    for (const auto& c : roi.cells) sum += r[c];
    roi.area = static_cast<double>(roi.cells.size()) * spec.cell_area();
    roi.variation = sum / static_cast<double>(roi.cells.size());
    rois.push_back(std::move(roi));
  }
  return rois;
}

namespace {

std::vector<double> min_max(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(*hi > *lo ? (x - *lo) / (*hi - *lo) : 1.0);
  return out;
}

}  // namespace

std::vector<RegionOfInterest> prioritize(std::vector<RegionOfInterest> rois, const AssignmentWeights& weights) {
  std::vector<double> area, variation;
  for (const auto& r : rois) {
    area.push_back(r.area);
    variation.push_back(r.variation);
  }
  if (weights.normalize) {
    area = min_max(area);
    variation = min_max(variation);
  }
  for (std::size_t i = 0; i < rois.size(); ++i) {
    rois[i].priority = weights.mu * area[i] + weights.beta * variation[i];
  }
  std::stable_sort(rois.begin(), rois.end(), [](const RegionOfInterest& a, const RegionOfInterest& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.id < b.id;
  });
  return rois;
}

std::vector<RoiAssignment> assign_vehicles(std::span<const RegionOfInterest> rois,
                                           std::span<const VehicleInfo> vehicles, const GridSpec& spec,
                                           const AssignmentWeights& weights) {
  std::vector<VehicleInfo> available;
  for (const auto& v : vehicles) {
    if (v.energy > 0.0) available.push_back(v);
  }
  if (available.empty()) throw std::runtime_error("mission: no vehicle has energy left");
  if (rois.empty()) return {};

  // Normalised energy; unlimited energy counts as full charge.
  double top = 0.0;
  bool unlimited = false;
  for (const auto& v : available) {
    if (std::isinf(v.energy)) unlimited = true;
    else top = std::max(top, v.energy);
  }
  auto energy_term = [&](const VehicleInfo& v) {
    if (!weights.normalize) return std::isinf(v.energy) ? std::numeric_limits<double>::max() : v.energy;
    if (unlimited) return std::isinf(v.energy) ? 1.0 : 0.0;
    return top > 0.0 ? v.energy / top : 0.0;
  };
  const double sign = weights.energy_sign == EnergySign::Minus ? -1.0 : 1.0;

  std::vector<RoiAssignment> out;
  for (std::size_t k = 0; k < rois.size(); ++k) {
    const auto& roi = rois[k];
    RoiAssignment a{roi.id, {}};
    const std::size_t remaining = rois.size() - k;
    const std::size_t take = (available.size() + remaining - 1) / remaining;

    std::vector<std::pair<double, VehicleInfo>> ranked;
    for (const auto& v : available) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& c : roi.cells) {
        d = std::min(d, std::hypot(spec.center_x(v.pos) - spec.center_x(c), spec.center_y(v.pos) - spec.center_y(c)));
      }
      ranked.emplace_back(d + sign * weights.psi * energy_term(v), v);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first < y.first;
      return x.second.id < y.second.id;
    });

    std::vector<int> chosen;
    for (std::size_t i = 0; i < take && i < ranked.size(); ++i) chosen.push_back(ranked[i].second.id);
    std::erase_if(available, [&](const VehicleInfo& v) {
      return std::find(chosen.begin(), chosen.end(), v.id) != chosen.end();
    });
    a.vehicles = std::move(chosen);
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

struct SubGrid {
  int r0, c0, rows, cols;  // bounding box in coarse cells
  int k;
  [[nodiscard]] GridPos parent(const GridPos& sub) const { return {r0 + sub.row / k, c0 + sub.col / k}; }
};

SubGrid bounding_box(const RegionOfInterest& roi, int k) {
  int r0 = roi.cells.front().row, r1 = r0, c0 = roi.cells.front().col, c1 = c0;
  for (const auto& c : roi.cells) {
    r0 = std::min(r0, c.row);
    r1 = std::max(r1, c.row);
    c0 = std::min(c0, c.col);
    c1 = std::max(c1, c.col);
  }
  return {r0, c0, r1 - r0 + 1, c1 - c0 + 1, k};
}

int manhattan(const GridPos& a, const GridPos& b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

std::vector<comms::ChannelEvent> exchange_data(std::span<const AgentState> agents, double time,
                                               const comms::AsyncConfig& cfg, Rng& rng) {
  std::vector<int> ids;
  std::vector<comms::Message> msgs;
  for (const auto& a : agents) {
    if (!a.active()) continue;
    ids.push_back(a.id);
    msgs.push_back({a.id, comms::MessageKind::Data, {}, time});
  }
  if (ids.empty()) return {};
  return comms::async_broadcast(ids, msgs, rng, cfg).events;
}

constexpr std::uint64_t kPhase1Stream = 1;
constexpr std::uint64_t kCommsStream = 2;
constexpr std::uint64_t kPhase2Stream = 100;

}  // namespace

GlobalMap run_mission(std::span<const SensorSample> samples, const GridSpec& spec, const MissionConfig& cfg,
                      bool expand) {
  spec.validate();
  const auto binned = grid_bin(samples, spec);
  return run_mission(build_reward_field(binned.cells, expand), samples, spec, cfg);
}

GlobalMap run_mission(const RewardField& coarse, std::span<const SensorSample> samples, const GridSpec& spec,
                      const MissionConfig& cfg) {
  cfg.validate();
  spec.validate();
  if (coarse.rows() != spec.rows || coarse.cols() != spec.cols) {
    throw ConfigError("reward field dimensions do not match the grid");
  }

  GlobalMap map;
  map.coarse = coarse;
  map.coarse_mean = Grid<double>(spec.rows, spec.cols, std::numeric_limits<double>::quiet_NaN());
  if (!samples.empty()) {
    const auto binned = grid_bin(samples, spec);
    for (std::size_t i = 0; i < binned.cells.size(); ++i) {
      const auto& c = binned.cells.values()[i];
      if (c.has_mean()) map.coarse_mean.values()[i] = c.mean;
    }
  }

  Rng comms_rng(derive_seed(cfg.seed, kCommsStream));

  // Phase 1: learn over the whole grid in surface mode.
  EngineConfig p1 = cfg.phase1;
  p1.seed = derive_seed(cfg.seed, kPhase1Stream);
  p1.traffic = TrafficMode::Surface;
  map.phase1 = run(coarse, p1);
  {
    auto init = exchange_data(map.phase1.agents, 0.0, cfg.async, comms_rng);
    map.comms_log.insert(map.comms_log.end(), init.begin(), init.end());
    const double end = map.phase1.estimated_seconds;
    auto done = exchange_data(map.phase1.agents, end, cfg.async, comms_rng);
    map.comms_log.insert(map.comms_log.end(), done.begin(), done.end());
  }
  if (!map.phase1.policy_converged()) {
    map.aborted = true;
    map.abort_reason = "phase 1 did not converge within " + std::to_string(p1.max_steps) + " steps";
    return map;
  }

  map.rois = prioritize(detect_rois(coarse, spec, cfg.weights), cfg.weights);

  std::vector<VehicleInfo> vehicles;
  for (const auto& a : map.phase1.agents) vehicles.push_back({a.id, a.pos, a.energy});
  map.assignments = assign_vehicles(map.rois, vehicles, spec, cfg.weights);

  const double threshold = percentile(coarse.rewards.values(), cfg.reward_threshold_percentile);
  const double comms_start = map.comms_log.empty() ? 0.0 : map.comms_log.back().time;
  std::uint64_t sync_round_index = static_cast<std::uint64_t>(std::ceil(comms_start / cfg.sync.window));

  for (const auto& roi : map.rois) {
    const auto it = std::find_if(map.assignments.begin(), map.assignments.end(),
                                 [&](const RoiAssignment& a) { return a.roi_id == roi.id; });
    const SubGrid box = bounding_box(roi, cfg.refinement);
    const int k = cfg.refinement;

    FineMap fine;
    fine.roi_id = roi.id;
    fine.origin_row = box.r0;
    fine.origin_col = box.c0;
    fine.refinement = k;
    fine.expected = Grid<double>(box.rows * k, box.cols * k, 0.0);
    fine.measured = Grid<double>(box.rows * k, box.cols * k, std::numeric_limits<double>::quiet_NaN());
    fine.searched_by = Grid<int>(box.rows * k, box.cols * k, -1);
    fine.in_roi = Grid<int>(box.rows * k, box.cols * k, 0);
    for (std::size_t i = 0; i < fine.expected.size(); ++i) {
      const GridPos sub = fine.expected.pos(i);
      const GridPos parent = box.parent(sub);
      if (std::binary_search(roi.cells.begin(), roi.cells.end(), parent)) {
        fine.in_roi[sub] = 1;
        fine.expected[sub] = coarse[parent];
      }
    }

    // What a vehicle reconstructs when it searches a subcell.
    Grid<double> observation = fine.expected;
    if (!samples.empty()) {
      const GridSpec sub_spec{box.rows * k, box.cols * k, box.cols * spec.cell_width(), box.rows * spec.cell_height()};
      std::vector<SensorSample> local;
      const double ox = box.c0 * spec.cell_width();
      const double oy = box.r0 * spec.cell_height();
      for (const auto& s : samples) {
        SensorSample t = s;
        t.x -= ox;
        t.y -= oy;
        local.push_back(t);
      }
      observation = build_reward_field(grid_bin(local, sub_spec).cells, coarse.expanded).rewards;
    }

    if (it == map.assignments.end() || it->vehicles.empty()) {
      map.fine.push_back(std::move(fine));
      continue;
    }

    // Team members start at the RoI subcell nearest to where Phase 1 left them.
    std::vector<AgentState> team;
    for (int id : it->vehicles) {
      const auto& a = map.phase1.agents.at(static_cast<std::size_t>(id));
      const GridPos mapped{std::clamp((a.pos.row - box.r0) * k, 0, box.rows * k - 1),
                           std::clamp((a.pos.col - box.c0) * k, 0, box.cols * k - 1)};
      GridPos best = mapped;
      int best_d = std::numeric_limits<int>::max();
      for (std::size_t i = 0; i < fine.in_roi.size(); ++i) {
        const GridPos sub = fine.in_roi.pos(i);
        if (!fine.in_roi[sub]) continue;
        const int d = manhattan(sub, mapped);
        if (d < best_d) {
          best_d = d;
          best = sub;
        }
      }
      AgentState member = a;
      member.pos = best;
      member.reward_threshold = threshold;
      team.push_back(member);
    }

    // Learn the sub-field with this RoI's vehicles only.
    EngineConfig p2 = cfg.phase2;
    p2.num_agents = static_cast<int>(team.size());
    p2.seed = derive_seed(cfg.seed, kPhase2Stream + static_cast<std::uint64_t>(roi.id));
    p2.start_positions.clear();
    for (const auto& m : team) p2.start_positions.push_back(m.pos);
    p2.energy_budget.reset();
    const RunReport learned = run(RewardField{fine.expected, coarse.expanded}, p2);

    // Exploit the learned table: no further Q-updates, registry-enforced exclusivity.
    SearchedRegistry registry(box.rows * k, box.cols * k);
    std::vector<char> stranded(team.size(), 0);
    while (true) {
      bool progressed = false;
      for (std::size_t t = 0; t < team.size(); ++t) {
        auto& m = team[t];
        if (!m.active() || stranded[t]) continue;
        std::optional<GridPos> target;
        double target_value = -std::numeric_limits<double>::infinity();
        int target_dist = std::numeric_limits<int>::max();
        for (std::size_t i = 0; i < fine.in_roi.size(); ++i) {
          const GridPos c = fine.in_roi.pos(i);
          if (!fine.in_roi[c] || registry.status(c) != CellStatus::Free) continue;
          if (fine.expected[c] < m.reward_threshold) continue;  // below threshold: not a reward
          const QRow q = learned.final_q.row(c);
          const double value = *std::max_element(q.begin(), q.end());
          const int d = manhattan(m.pos, c);
          if (value > target_value || (value == target_value && d < target_dist)) {
            target = c;
            target_value = value;
            target_dist = d;
          }
        }
        if (!target) continue;
        const double cost = static_cast<double>(target_dist + 1);
        if (m.energy < cost) {
          stranded[t] = 1;
          continue;
        }
        if (!registry.claim_cell(*target, m.id)) continue;
        m.pos = *target;
        if (!std::isinf(m.energy)) m.energy -= cost;
        registry.mark_searched(*target, m.id);
        fine.measured[*target] = observation[*target];
        fine.searched_by[*target] = m.id;
        fine.search_log.emplace_back(*target, m.id);
        progressed = true;
      }
      if (!progressed) break;

      std::vector<comms::VehicleStatus> status;
      for (const auto& m : team) status.push_back({m.id, m.active()});
      auto log = comms::sync_round(status, cfg.sync, sync_round_index++);
      map.comms_log.insert(map.comms_log.end(), log.begin(), log.end());
    }
    map.fine.push_back(std::move(fine));
  }
  return map;
}

}  // namespace uwmarl
