#include <benchmark/benchmark.h>

#include "gd/flow.hpp"
#include "gd/lab.hpp"

using namespace gd;

namespace {

const Graph& grid() {
  static const Graph g = generate(Family::grid, 3, 0, 4);
  return g;
}

const ChainParams kHardcore{ChainKind::independent_set, 2.0, 3};

void BM_EnumerateParallel(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(enumerate_states(grid(), kHardcore));
}
void BM_EnumerateSerial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(enumerate_states_serial(grid(), kHardcore));
}
void BM_BuildSpaceParallel(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(build_state_space(grid(), kHardcore));
}
void BM_BuildSpaceSerial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(build_state_space_serial(grid(), kHardcore));
}

const StateSpace& small_space() {
  static const StateSpace sp = build_state_space(generate(Family::cycle, 9), kHardcore);
  return sp;
}

void BM_MixingParallel(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(exact_mixing_time(small_space(), 0.25));
}
void BM_MixingSerial(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(exact_mixing_time_serial(small_space(), 0.25));
}

void BM_Flow(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(build_flow(small_space()));
}

void BM_SimulateSteps(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(simulate_chain(grid(), kHardcore, s.range(0), 1));
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

void BM_EmpiricalTv(benchmark::State& s) {
  const StateSpace sp = build_state_space(generate(Family::path, 6), kHardcore, kDefaultStateCap, Normalizer::sites);
  for (auto _ : s) benchmark::DoNotOptimize(empirical_tv(sp, 64, static_cast<int>(s.range(0)), 1));
}

}  // namespace

BENCHMARK(BM_EnumerateParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildSpaceParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildSpaceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MixingParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MixingSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Flow)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSteps)->Arg(100000);
BENCHMARK(BM_EmpiricalTv)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
