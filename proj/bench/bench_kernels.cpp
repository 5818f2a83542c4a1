// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference loops against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "bbrt/corpus.hpp"
#include "bbrt/kernels.hpp"

namespace {

using namespace bbrt;

const std::vector<TokenSequence>& corpus(std::size_t n) {
  static std::vector<TokenSequence> c = generate_synthetic_corpus(CorpusOptions{4000, 4, 24, 11});
  static std::vector<TokenSequence> out;
  out.assign(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(std::min(n, c.size())));
  return out;
}

template <bool Parallel>
void BM_Fingerprints(benchmark::State& state) {
  const auto graphs = kernels::serial::decode_all(corpus(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    auto fps = Parallel ? kernels::parallel::fingerprints(graphs, 2) : kernels::serial::fingerprints(graphs, 2);
    benchmark::DoNotOptimize(fps.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_PairwiseDiversity(benchmark::State& state) {
  const auto graphs = kernels::serial::decode_all(corpus(static_cast<std::size_t>(state.range(0))));
  const auto fps = kernels::serial::fingerprints(graphs, 2);
  for (auto _ : state) {
    double d = Parallel ? kernels::parallel::pairwise_distance_sum(fps) : kernels::serial::pairwise_distance_sum(fps);
    benchmark::DoNotOptimize(d);
  }
}

template <bool Parallel>
void BM_Evaluate(benchmark::State& state) {
  const auto graphs = kernels::serial::decode_all(corpus(static_cast<std::size_t>(state.range(0))));
  const auto oracle = PropertyOracle::qed_surrogate();
  for (auto _ : state) {
    auto v = Parallel ? kernels::parallel::evaluate(oracle, graphs) : kernels::serial::evaluate(oracle, graphs);
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void BM_MinDistance(benchmark::State& state) {
  const auto graphs = kernels::serial::decode_all(corpus(static_cast<std::size_t>(state.range(0))));
  const auto fps = kernels::serial::fingerprints(graphs, 2);
  std::vector<double> dist(fps.size(), 1.0);
  for (auto _ : state) {
    if (Parallel) kernels::parallel::update_min_distance(fps[0], fps, dist);
    else kernels::serial::update_min_distance(fps[0], fps, dist);
    benchmark::DoNotOptimize(dist.data());
  }
}

}  // namespace

BENCHMARK(BM_Fingerprints<false>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_Fingerprints<true>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_PairwiseDiversity<false>)->Arg(500)->Arg(2000);
BENCHMARK(BM_PairwiseDiversity<true>)->Arg(500)->Arg(2000);
BENCHMARK(BM_Evaluate<false>)->Arg(4000);
BENCHMARK(BM_Evaluate<true>)->Arg(4000);
BENCHMARK(BM_MinDistance<false>)->Arg(4000);
BENCHMARK(BM_MinDistance<true>)->Arg(4000);

BENCHMARK_MAIN();
