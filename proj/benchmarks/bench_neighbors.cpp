#include <benchmark/benchmark.h>

#include "otplan/dynamics.hpp"

using namespace otplan;

namespace {

Configuration scattered(std::size_t n, double half) {
  RngStream rng(1);
  std::vector<Vec2> pts(n);
  for (auto& p : pts) p = {half * (2 * rng.next_uniform() - 1), half * (2 * rng.next_uniform() - 1)};
  return Configuration(pts);
}

}  // namespace

// Robot density is held fixed (about one robot per 0.04 area) so the
// neighbour count per robot stays constant as N grows.
static void BM_NeighborPairsHashGrid(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Configuration x = scattered(n, 0.1 * std::sqrt(static_cast<double>(n)));
  for (auto _ : state) benchmark::DoNotOptimize(neighbor_pairs(x, 0.2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NeighborPairsHashGrid)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

static void BM_NeighborPairsBruteForce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Configuration x = scattered(n, 0.1 * std::sqrt(static_cast<double>(n)));
  for (auto _ : state) benchmark::DoNotOptimize(neighbor_pairs_brute_force(x, 0.2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NeighborPairsBruteForce)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_MinPairwiseDistance(benchmark::State& state) {
  const Configuration x = scattered(static_cast<std::size_t>(state.range(0)), 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(min_pairwise_distance(x));
}
BENCHMARK(BM_MinPairwiseDistance)->Arg(1000)->Arg(10000);
