#include <benchmark/benchmark.h>

#include <cmath>

#include "cvfid/fock.hpp"

using namespace cvfid;

// Exact Fock teleportation; cost grows with the polynomial degree 2N.
static void BM_FockTeleport(benchmark::State& state) {
  const int big_n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fock_teleport_fidelity(big_n, 2.0, std::sqrt(3.0), 0.9).value);
}
BENCHMARK(BM_FockTeleport)->DenseRange(0, 8, 2)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_DisplacedFockTeleport(benchmark::State& state) {
  const int big_n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(displaced_fock_teleport_fidelity(big_n, 2.0, std::sqrt(3.0), 0.9, 4.0).value);
  }
}
BENCHMARK(BM_DisplacedFockTeleport)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

static void BM_UnitGainSum(benchmark::State& state) {
  const int big_n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fock_unit_gain_fidelity(big_n, 0.3));
}
BENCHMARK(BM_UnitGainSum)->Range(1, 1024);

static void BM_Ensemble(benchmark::State& state) {
  const FockEnsembleParams p{0.9, 0.5, ensemble_order_for_tail(0.9, 1e-12), std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(fock_ensemble_fidelity(p).truncated_sum.value);
}
BENCHMARK(BM_Ensemble);

BENCHMARK_MAIN();
