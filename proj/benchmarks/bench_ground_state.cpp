#include <benchmark/benchmark.h>

#include "pspin/oracle.hpp"
#include "pspin/tensor.hpp"

namespace {

void BM_GroundState(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto a = pspin::sample_gaussian(p, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(pspin::brute_force_ground_state(a).eta_N);
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}

}  // namespace

BENCHMARK(BM_GroundState)->Args({2, 16})->Args({4, 10})->Args({4, 12})->Unit(benchmark::kMillisecond);
