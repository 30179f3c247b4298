#include <benchmark/benchmark.h>

#include <cmath>

#include "cvfid/optimize.hpp"
#include "cvfid/protocols.hpp"

using namespace cvfid;

static void BM_TeleportPipeline(benchmark::State& state) {
  const TeleportationParams p{2.0, std::sqrt(3.0), 5.0, 0.9};
  for (auto _ : state) benchmark::DoNotOptimize(teleport_pipeline(p).value);
}
BENCHMARK(BM_TeleportPipeline);

static void BM_TeleportClosedForm(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(teleport_fidelity_analytic(2.0, std::sqrt(3.0), 5.0));
}
BENCHMARK(BM_TeleportClosedForm);

static void BM_MemoryPipeline(benchmark::State& state) {
  const MemoryParams p{1.0, 2.0, 10.0, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(memory_pipeline(p).value);
}
BENCHMARK(BM_MemoryPipeline);

static void BM_OptimizeTeleportGain(benchmark::State& state) {
  for (auto _ : state) {
    const auto best = optimize_gain([](double g) { return teleport_pipeline({2.0, 1.5, 5.0, g}).value; });
    benchmark::DoNotOptimize(best.gain);
  }
}
BENCHMARK(BM_OptimizeTeleportGain);

BENCHMARK_MAIN();
