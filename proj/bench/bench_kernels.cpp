// OpenMP kernels against their serial references.
//   ./densereg_bench --benchmark_filter=Argmax
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>

#include "densereg/kernels.hpp"
#include "densereg/random.hpp"
#include "densereg/tensor_io.hpp"

using namespace densereg;

namespace {

FeatureMap random_map(int c, int h, int w, std::uint64_t seed) {
  SplitMix64 rng(seed);
  FeatureMap fm(c, h, w);
  for (auto& v : fm.data) v = static_cast<float>(rng.uniform(-1, 1));
  return l2_normalize_channels(fm);
}

std::vector<float> random_queries(int n, int c, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<float> q(static_cast<std::size_t>(n) * c);
  for (auto& v : q) v = static_cast<float>(rng.uniform(-1, 1));
  return q;
}

ImageBuffer random_image(int w, int h) {
  SplitMix64 rng(3);
  ImageBuffer img(w, h, 1);
  for (auto& v : img.samples) v = static_cast<float>(rng.uniform());
  return img;
}

kernels::PullBack rotation(double cx, double cy) {
  const double c = std::cos(0.2), s = std::sin(0.2);
  return [=](Point2 p) -> std::optional<Point2> {
    const double dx = p.x - cx, dy = p.y - cy;
    return Point2{cx + c * dx - s * dy + 3.5, cy + s * dx + c * dy - 2.0};
  };
}

// args: grid side, channels; 1000 queries as in one registration stage
void BM_Argmax(benchmark::State& state) {
  const auto dst = random_map(int(state.range(1)), int(state.range(0)), int(state.range(0)), 1);
  const auto q = random_queries(1000, dst.channels, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::argmax_dot(q, dst, 64));
  state.SetItemsProcessed(state.iterations() * 1000 * dst.width * dst.height);
}

void BM_ArgmaxReference(benchmark::State& state) {
  const auto dst = random_map(int(state.range(1)), int(state.range(0)), int(state.range(0)), 1);
  const auto q = random_queries(1000, dst.channels, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::argmax_dot(q, dst));
  state.SetItemsProcessed(state.iterations() * 1000 * dst.width * dst.height);
}

void BM_WarpImage(benchmark::State& state) {
  const int n = int(state.range(0));
  const auto img = random_image(n, n);
  const auto map = rotation(n / 2.0, n / 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::warp_image(img, map, n, n));
}

void BM_WarpImageReference(benchmark::State& state) {
  const int n = int(state.range(0));
  const auto img = random_image(n, n);
  const auto map = rotation(n / 2.0, n / 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::warp_image(img, map, n, n));
}

void BM_WarpFeatures(benchmark::State& state) {
  const auto fm = random_map(int(state.range(1)), int(state.range(0)), int(state.range(0)), 4);
  const auto map = rotation(fm.width / 2.0, fm.height / 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::warp_featuremap(fm, map, fm.width, fm.height));
}

void BM_WarpFeaturesReference(benchmark::State& state) {
  const auto fm = random_map(int(state.range(1)), int(state.range(0)), int(state.range(0)), 4);
  const auto map = rotation(fm.width / 2.0, fm.height / 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::warp_featuremap(fm, map, fm.width, fm.height));
}

}  // namespace

BENCHMARK(BM_Argmax)->Args({29, 256})->Args({64, 32})->Args({128, 32})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ArgmaxReference)->Args({29, 256})->Args({64, 32})->Args({128, 32})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WarpImage)->Arg(256)->Arg(920)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WarpImageReference)->Arg(256)->Arg(920)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WarpFeatures)->Args({64, 32})->Args({29, 256})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WarpFeaturesReference)->Args({64, 32})->Args({29, 256})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
