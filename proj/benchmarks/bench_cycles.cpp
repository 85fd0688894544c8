#include <benchmark/benchmark.h>

#include "celltop/complex.hpp"
#include "celltop/tensor.hpp"

using namespace celltop;

namespace {

Skeleton random_graph(int n, double p, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  return Skeleton::from_edges(n, std::move(edges));
}

}  // namespace

static void BM_EnumerateCycles(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  int k_max = static_cast<int>(state.range(1));
  Skeleton g = random_graph(n, 4.0 / n, 5);  // avg degree ~4
  for (auto _ : state) {
    benchmark::DoNotOptimize(enumerate_induced_cycles(g, k_max));
  }
}
BENCHMARK(BM_EnumerateCycles)
    ->Args({50, 4})
    ->Args({200, 4})
    ->Args({1000, 4})
    ->Args({200, 5})
    ->Args({200, 6});

static void BM_Lift(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Skeleton g = random_graph(n, 4.0 / n, 9);
  std::vector<Cycle> cand = enumerate_induced_cycles(g, 4);
  std::vector<int> all(cand.size());
  for (size_t i = 0; i < cand.size(); ++i) all[i] = static_cast<int>(i);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lift(g, cand, all));
  }
}
BENCHMARK(BM_Lift)->Arg(50)->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
