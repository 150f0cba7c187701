#include <benchmark/benchmark.h>

#include "vstkit/consistency.hpp"
#include "vstkit/fft.hpp"
#include "vstkit/observer.hpp"
#include "vstkit/rng.hpp"

using namespace vstkit;

static void BM_BatchSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_precision_serial(StaircaseConfig{}, ObserverModel{}, n, 1));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BatchSerial)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_BatchParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_precision(StaircaseConfig{}, ObserverModel{}, n, 1));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BatchParallel)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_ConsistencySerial(benchmark::State& state) {
  const auto trials = synthesize_corpus(Instrument::Fork, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(consistency_report_serial(trials, {}));
}
BENCHMARK(BM_ConsistencySerial)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_ConsistencyParallel(benchmark::State& state) {
  const auto trials = synthesize_corpus(Instrument::Fork, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(consistency_report(trials, {}));
}
BENCHMARK(BM_ConsistencyParallel)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<Complex> x(n);
  for (auto& v : x) v = {rng.normal(), 0.0};
  for (auto _ : state) {
    auto y = x;
    fft_inplace(y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(256, 1 << 16)->Complexity(benchmark::oNLogN);

BENCHMARK_MAIN();
