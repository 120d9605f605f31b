#include <benchmark/benchmark.h>

#include "uwmarl/engine.hpp"
#include "uwmarl/harness.hpp"
#include "uwmarl/policy.hpp"
#include "uwmarl/shared_q.hpp"

namespace {

void BM_BoltzmannSample(benchmark::State& state) {
  uwmarl::Rng rng(1);
  const uwmarl::QRow q{0.3, 1.7, -0.2, 0.9};
  double t = 0.0;
  for (auto _ : state) {
    const double temp = uwmarl::decay_value(uwmarl::kDefaultTemperature, t);
    t += 1.0;
    benchmark::DoNotOptimize(uwmarl::sample_action(uwmarl::boltzmann_probs(q, temp), rng));
  }
}
BENCHMARK(BM_BoltzmannSample);

void BM_QUpdate(benchmark::State& state) {
  uwmarl::QTable q(4, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(q.apply_update({1, 1}, uwmarl::Action::Right, 1.0, {1, 2}, 0.5, 0.9));
  }
}
BENCHMARK(BM_QUpdate);

void BM_EngineRun(benchmark::State& state) {
  const auto field = uwmarl::harness::reference_field(true);
  uwmarl::EngineConfig cfg;
  cfg.num_agents = static_cast<int>(state.range(0));
  cfg.run_until_value_convergence = false;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cfg.seed = seed++;
    benchmark::DoNotOptimize(uwmarl::run(field, cfg).rounds);
  }
}
BENCHMARK(BM_EngineRun)->Arg(1)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
