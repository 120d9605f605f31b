#pragma once

#include <array>
#include <cstdint>

#include "uwmarl/mdp.hpp"
#include "uwmarl/rng.hpp"

namespace uwmarl {

/// Half-life ("radioactive") decay from v_max toward v_min:
///   v(t) = v_min + (v_max - v_min) * exp(-(ln 2 / half_life) * t)
struct DecaySchedule {
  double v_min = 0.0;
  double v_max = 0.0;
  double half_life = 1.0;  // in clock ticks

  /// Throws ConfigError unless 0 < v_min <= v_max and half_life > 0.
  void validate() const;
};

inline constexpr DecaySchedule kDefaultTemperature{0.01, 1000.0, 100.0};
inline constexpr DecaySchedule kDefaultLearningRate{0.001, 1.0, 100.0};

double decay_value(const DecaySchedule& sched, double t);

using QRow = std::array<double, kActionCount>;

struct ActionDistribution {
  std::array<double, kActionCount> probs{};
};

/// Softmax of q / temperature. The row maximum is subtracted before
/// exponentiation, so large q or small temperature cannot overflow.
/// Throws std::domain_error for temperature <= 0 or non-finite q.
ActionDistribution boltzmann_probs(const QRow& q, double temperature);

/// Inverse-CDF draw using one uniform from rng.
Action sample_action(const ActionDistribution& dist, Rng& rng);

}  // namespace uwmarl
