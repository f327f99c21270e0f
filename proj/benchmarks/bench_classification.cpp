#include <benchmark/benchmark.h>

#include "kmlab/classification.hpp"
#include "kmlab/rng.hpp"

namespace {

kmlab::Assignment random_assignment(kmlab::Rng& rng, std::size_t n, int k) {
  kmlab::Assignment a;
  a.k = k;
  a.cells.resize(n);
  for (auto& c : a.cells) c = static_cast<int>(rng.index(k));
  return a;
}

void BM_classif_risk(benchmark::State& state) {
  kmlab::Rng rng(5);
  const int k = static_cast<int>(state.range(1));
  const auto a = random_assignment(rng, state.range(0), k);
  const auto b = random_assignment(rng, state.range(0), k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmlab::classif_risk_empirical(a, b, k));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_classif_risk)->Args({1 << 12, 4})->Args({1 << 12, 8})->Args({1 << 12, 16});

void BM_label_matching(benchmark::State& state) {
  kmlab::Rng rng(6);
  const int k = static_cast<int>(state.range(0));
  std::vector<std::vector<double>> counts(k, std::vector<double>(k));
  for (auto& row : counts)
    for (auto& v : row) v = std::floor(rng.uniform(0.0, 1000.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmlab::best_label_matching(counts));
  }
}
BENCHMARK(BM_label_matching)->Arg(8)->Arg(16)->Arg(32);

}  // namespace
