#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwmarl/comms.hpp"
#include "uwmarl/engine.hpp"
#include "uwmarl/grid.hpp"
#include "uwmarl/sensor_ingest.hpp"

namespace uwmarl {

struct RegionOfInterest {
  int id = 0;
  std::vector<GridPos> cells;  // 4-connected, row-major order
  double area = 0.0;           // D: cell count * cell area, m^2
  double variation = 0.0;      // Gamma: mean Phase-1 reward over the cells
  double priority = 0.0;       // Lambda, filled in by prioritize()
};

enum class EnergySign { Plus, Minus };

struct AssignmentWeights {
  double mu = 1.0;
  double beta = 1.0;
  double psi = 0.5;
  double roi_threshold_percentile = 75.0;
  /// Rank key is d + psi*e (Plus) or d - psi*e (Minus, favours charged vehicles).
  EnergySign energy_sign = EnergySign::Minus;
  /// Min-max normalise D, Gamma and energy to [0, 1] before weighting.
  bool normalize = true;

  void validate() const;
};

struct MissionConfig {
  AssignmentWeights weights;
  EngineConfig phase1 = [] {
    EngineConfig c;
    c.num_agents = 2;
    c.run_until_value_convergence = false;
    return c;
  }();
  /// Engine settings for the per-RoI runs; agent count and starts are overridden.
  EngineConfig phase2 = [] {
    EngineConfig c;
    c.traffic = TrafficMode::Underwater;
    c.underwater_window = 1;
    c.run_until_value_convergence = false;
    c.max_steps = 20'000;
    return c;
  }();
  int refinement = 2;  // each coarse RoI cell becomes refinement x refinement subcells
  /// Per-vehicle reward threshold, as a percentile of Phase-1 rewards.
  double reward_threshold_percentile = 25.0;
  comms::AsyncConfig async;
  comms::SyncConfig sync;
  std::uint64_t seed = 0;

  void validate() const;
};

struct VehicleInfo {
  int id = 0;
  GridPos pos;
  double energy = 0.0;
};

struct RoiAssignment {
  int roi_id = 0;
  std::vector<int> vehicles;
};

struct FineMap {
  int roi_id = 0;
  int origin_row = 0;  // coarse cell of the bounding box's first subcell
  int origin_col = 0;
  int refinement = 1;
  /// Expected reward per subcell (inherits the parent cell's Phase-1 reward).
  Grid<double> expected;
  /// Reconstructed measurement per searched subcell, NaN where not searched.
  Grid<double> measured;
  /// Vehicle that searched each subcell, -1 if none.
  Grid<int> searched_by;
  /// 1 for subcells whose parent belongs to the RoI.
  Grid<int> in_roi;
  /// Every search in the order it happened: (subcell, vehicle).
  std::vector<std::pair<GridPos, int>> search_log;
};

struct GlobalMap {
  RewardField coarse;
  /// Per-cell sample mean, NaN for cells without samples.
  Grid<double> coarse_mean;
  std::vector<RegionOfInterest> rois;  // priority order
  std::vector<RoiAssignment> assignments;
  std::vector<FineMap> fine;
  std::vector<comms::ChannelEvent> comms_log;
  RunReport phase1;
  bool aborted = false;
  std::string abort_reason;
};

/// Percentile with linear interpolation between closest ranks (p in [0, 100]).
double percentile(std::vector<double> values, double p);

/// Cells whose reward is >= the configured percentile, grouped into
/// 4-connected components. Ids follow row-major discovery order from 1.
std::vector<RegionOfInterest> detect_rois(const RewardField& coarse, const GridSpec& spec,
                                          const AssignmentWeights& weights);

/// Fills priority (mu*D + beta*Gamma, optionally on normalised D and Gamma) and
/// sorts descending, ties to the smaller id.
std::vector<RegionOfInterest> prioritize(std::vector<RegionOfInterest> rois, const AssignmentWeights& weights);

/// Walks the RoIs in the given order; each takes ceil(available / remaining)
/// vehicles with the smallest d_ij -/+ psi*e_j. Vehicles with no energy are
/// skipped. Throws std::runtime_error when no vehicle has energy.
std::vector<RoiAssignment> assign_vehicles(std::span<const RegionOfInterest> rois,
                                           std::span<const VehicleInfo> vehicles, const GridSpec& spec,
                                           const AssignmentWeights& weights);

/// Two-phase reconstruction. Phase 1 learns over the full grid; Phase 2 re-grids
/// each RoI and lets its vehicles search subcells with registry exclusivity.
/// When samples are empty the fine measurement falls back to the expected reward.
GlobalMap run_mission(std::span<const SensorSample> samples, const GridSpec& spec, const MissionConfig& cfg,
                      bool expand = true);
GlobalMap run_mission(const RewardField& coarse, std::span<const SensorSample> samples, const GridSpec& spec,
                      const MissionConfig& cfg);

}  // namespace uwmarl
