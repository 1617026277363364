#include <benchmark/benchmark.h>

#include "hmrgeom/camera.hpp"

namespace {

using namespace hmrgeom;

// Per-pixel ray map at the network crop resolution and at full HD.
void BM_RayMap(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Intrinsics K{1000.0, 1000.0, side / 2.0, side / 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ray_map(K, side, side, state.range(1) != 0));
  }
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_RayMap)->Args({256, 0})->Args({256, 1})->Args({1024, 0});

void BM_CropIntrinsics(benchmark::State& state) {
  const Intrinsics K{1000.0, 1000.0, 960.0, 540.0};
  const BBox box{700.0, 300.0, 420.0, 420.0 / 256.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(crop_intrinsics(K, box));
  }
}
BENCHMARK(BM_CropIntrinsics);

}  // namespace
