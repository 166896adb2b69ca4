#include <benchmark/benchmark.h>

#include "otplan/dynamics.hpp"
#include "otplan/shape.hpp"

using namespace otplan;

static void BM_NearestPointTree(benchmark::State& state) {
  const Shape s(shapes::circle({0, 0}, 3.0, static_cast<std::size_t>(state.range(0))));
  RngStream rng(2);
  std::vector<Vec2> queries(1024);
  for (auto& q : queries) q = {12 * rng.next_uniform() - 6, 12 * rng.next_uniform() - 6};
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.nearest_point(queries[k++ & 1023]));
}
BENCHMARK(BM_NearestPointTree)->RangeMultiplier(8)->Range(64, 32768);

static void BM_NearestPointExhaustive(benchmark::State& state) {
  const auto pts = shapes::circle({0, 0}, 3.0, static_cast<std::size_t>(state.range(0)));
  RngStream rng(2);
  std::vector<Vec2> queries(1024);
  for (auto& q : queries) q = {12 * rng.next_uniform() - 6, 12 * rng.next_uniform() - 6};
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(nearest_point_exhaustive(pts, queries[k++ & 1023]));
}
BENCHMARK(BM_NearestPointExhaustive)->RangeMultiplier(8)->Range(64, 32768);

static void BM_QGlyphBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Shape(shapes::q_glyph({})));
}
BENCHMARK(BM_QGlyphBuild);
