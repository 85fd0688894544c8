#include <benchmark/benchmark.h>

#include <vector>

#include "celltop/entmax.hpp"
#include "celltop/tensor.hpp"

using namespace celltop;

static void BM_EntmaxForward(benchmark::State& state) {
  int d = static_cast<int>(state.range(0));
  double alpha = state.range(1) / 100.0;
  Rng rng(7);
  std::vector<double> z(d);
  for (double& v : z) v = rng.uniform(-50, 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(entmax_forward(z, alpha));
  }
}
BENCHMARK(BM_EntmaxForward)
    ->Args({8, 150})
    ->Args({64, 150})
    ->Args({512, 150})
    ->Args({512, 100})
    ->Args({512, 200});

static void BM_EntmaxBackward(benchmark::State& state) {
  int d = static_cast<int>(state.range(0));
  Rng rng(11);
  std::vector<double> z(d), u(d), ds(d);
  for (double& v : z) v = rng.uniform(-10, 10);
  for (double& v : u) v = rng.uniform(-1, 1);
  EntmaxResult r = entmax_forward(z, 1.5);
  double da = 0;
  for (auto _ : state) {
    entmax_backward(r, 1.5, u, ds, da);
    benchmark::DoNotOptimize(ds.data());
  }
}
BENCHMARK(BM_EntmaxBackward)->Arg(8)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
