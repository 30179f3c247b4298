#include <benchmark/benchmark.h>

#include "cvfid/mc_oracle.hpp"

using namespace cvfid;

static void BM_McTeleport(benchmark::State& state) {
  McConfig c;
  c.seed = 1;
  c.samples = 100000;
  c.threads = static_cast<unsigned>(state.range(0));
  c.params = TeleportationParams{2.0, 1.5, 3.0, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(mc_teleport(c).mean);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.samples));
}
BENCHMARK(BM_McTeleport)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_McMemory(benchmark::State& state) {
  McConfig c;
  c.seed = 1;
  c.samples = 100000;
  c.threads = 1;
  c.params = MemoryParams{1.0, 2.0, 3.0, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(mc_memory(c).mean);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * c.samples));
}
BENCHMARK(BM_McMemory)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
