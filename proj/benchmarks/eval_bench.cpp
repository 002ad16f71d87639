#include <benchmark/benchmark.h>

#include <random>

#include "pirt/eval.hpp"

namespace {

// Self retrieval over n embeddings of width d in 50 classes.
void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  pirt::Matrix x(n, d);
  for (double& v : x.data()) v = normal(rng);
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::int64_t>(i % 50);
  const auto index = pirt::RetrievalIndex::self_retrieval(std::move(x), std::move(labels));
  for (auto _ : state) benchmark::DoNotOptimize(pirt::evaluate(index));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Evaluate)->Args({500, 64})->Args({2000, 512})->Unit(benchmark::kMillisecond);

}  // namespace
