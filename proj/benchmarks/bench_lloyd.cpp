#include <benchmark/benchmark.h>

#include "kmlab/lloyd.hpp"
#include "kmlab/models.hpp"
#include "kmlab/rng.hpp"

namespace {

kmlab::Dataset gaussian_blobs(long long n, int k, int d) {
  const double spread = 0.3;
  kmlab::Rng rng(17);
  kmlab::Dataset data;
  data.dim = d;
  for (long long i = 0; i < n; ++i) {
    const int cluster = static_cast<int>(rng.index(k));
    for (int t = 0; t < d; ++t)
      data.coords.push_back(3.0 * cluster + spread * rng.normal());
  }
  data.enclosing_radius = 3.0 * k + 10.0;
  return data;
}

void BM_partition(benchmark::State& state) {
  const auto data = gaussian_blobs(state.range(0), 4, 2);
  const kmlab::Codebook init = kmlab::kmeanspp_init(data, 4, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmlab::partition(data, init));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_partition)->Arg(1 << 10)->Arg(1 << 14);

void BM_lloyd_step(benchmark::State& state) {
  const auto data = gaussian_blobs(state.range(0), 4, 2);
  const kmlab::Codebook init = kmlab::kmeanspp_init(data, 4, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmlab::lloyd_step(data, init));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_lloyd_step)->Arg(1 << 10)->Arg(1 << 14);

void BM_kmeanspp(benchmark::State& state) {
  const auto data = gaussian_blobs(state.range(0), 8, 2);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmlab::kmeanspp_init(data, 8, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_kmeanspp)->Arg(1 << 10)->Arg(1 << 13);

void BM_multi_start(benchmark::State& state) {
  const auto data = gaussian_blobs(state.range(0), 4, 2);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmlab::multi_start_erm(data, 4, 10, ++seed));
  }
}
BENCHMARK(BM_multi_start)->Arg(1 << 10);

}  // namespace
