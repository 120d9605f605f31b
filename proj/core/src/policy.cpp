#include "uwmarl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uwmarl {

void DecaySchedule::validate() const {
  if (!(v_min > 0.0) || !std::isfinite(v_min)) throw ConfigError("decay schedule: minimum must be positive");
  if (!(v_max >= v_min) || !std::isfinite(v_max)) throw ConfigError("decay schedule: maximum must be >= minimum");
  if (!(half_life > 0.0) || !std::isfinite(half_life)) throw ConfigError("decay schedule: half-life must be positive");
}

double decay_value(const DecaySchedule& sched, double t) {
  return sched.v_min + (sched.v_max - sched.v_min) * std::exp(-(std::numbers::ln2 / sched.half_life) * t);
}

ActionDistribution boltzmann_probs(const QRow& q, double temperature) {
  if (!(temperature > 0.0)) throw std::domain_error("Boltzmann temperature must be positive");
  double top = q[0];
  for (double v : q) {
    if (!std::isfinite(v)) throw std::domain_error("Q-values must be finite");
    top = std::max(top, v);
  }
  ActionDistribution d;
  double sum = 0.0;
  for (std::size_t a = 0; a < kActionCount; ++a) {
    d.probs[a] = std::exp((q[a] - top) / temperature);
    sum += d.probs[a];
  }
  // sum >= 1 because the maximum contributes exp(0).
  for (double& p : d.probs) p /= sum;
  return d;
}

Action sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < kActionCount; ++a) {
    if (dist.probs[a] <= 0.0) continue;
    last_positive = a;
    acc += dist.probs[a];
    if (u < acc) return kActions[a];
  }
  // Rounding can leave acc slightly below 1.
  return kActions[last_positive];
}

}  // namespace uwmarl
