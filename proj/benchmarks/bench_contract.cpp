#include <benchmark/benchmark.h>

#include <vector>

#include "pspin/rng.hpp"
#include "pspin/tensor.hpp"

namespace {

std::vector<double> point(int n) {
  pspin::CounterStream rng(99);
  std::vector<double> u(static_cast<std::size_t>(n));
  for (auto& x : u) x = rng.uniform(-1.0, 1.0);
  return u;
}

void BM_ContractFull(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto a = pspin::sample_gaussian(p, n, 1);
  const auto u = point(n);
  for (auto _ : state) benchmark::DoNotOptimize(pspin::contract_full(a, u));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.size()));
}

void BM_ContractMarginal(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto a = pspin::sample_gaussian(p, n, 1);
  const auto u = point(n);
  for (auto _ : state) benchmark::DoNotOptimize(pspin::contract_marginal(a, u));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.size()));
}

}  // namespace

BENCHMARK(BM_ContractFull)->Args({2, 256})->Args({3, 64})->Args({4, 32});
BENCHMARK(BM_ContractMarginal)->Args({2, 256})->Args({3, 64})->Args({4, 32});
