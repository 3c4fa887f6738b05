#include "emkin/estimation.hpp"
#include "emkin/montecarlo.hpp"

#include <benchmark/benchmark.h>

using namespace emkin;

namespace {

const RatePair kRates{1.0, 1.5};
const WindowConfig kWindow{5.0 / 6.0};

SimConfig config(std::size_t n, PairKind kind) { return {n, kRates, kind, kWindow, 12345}; }

void BM_SimulateSerial(benchmark::State& state) {
  const auto cfg = config(static_cast<std::size_t>(state.range(0)), PairKind::Entangled);
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_serial(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateParallel(benchmark::State& state) {
  const auto cfg = config(static_cast<std::size_t>(state.range(0)), PairKind::Entangled);
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate(cfg, workers));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::vector<double> product_times(std::size_t n) {
  return one_emission_times(postselect(simulate(config(n, PairKind::Product)), kWindow).kept);
}

void BM_ProductLikelihoodSerial(benchmark::State& state) {
  const auto times = product_times(static_cast<std::size_t>(state.range(0)));
  const auto model = normalization_alpha(kRates, kWindow);
  for (auto _ : state)
    benchmark::DoNotOptimize(log_likelihood_product_serial(times, model));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(times.size()));
}

void BM_ProductLikelihoodParallel(benchmark::State& state) {
  const auto times = product_times(static_cast<std::size_t>(state.range(0)));
  const auto model = normalization_alpha(kRates, kWindow);
  for (auto _ : state)
    benchmark::DoNotOptimize(log_likelihood_product(times, model));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(times.size()));
}

} // namespace

BENCHMARK(BM_SimulateSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Args({1 << 20, 1})->Args({1 << 20, 2})->Args({1 << 20, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProductLikelihoodSerial)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProductLikelihoodParallel)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
