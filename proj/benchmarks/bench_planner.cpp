#include <benchmark/benchmark.h>

#include "otplan/planner.hpp"

using namespace otplan;

namespace {

struct Setup {
  Shape shape;
  PotentialParams pot;
  PlannerParams params;
  Configuration x;

  explicit Setup(std::size_t n)
      : shape(shapes::circle({0, 0}, 4.0, 2500)), pot(PotentialParams::table1(0.01)),
        params(PlannerParams::table1(0.01, shape)) {
    RngStream rng(1, 3);
    x = initial_configuration(InitMode::Random, n, pot, 6.0, rng);
  }
};

}  // namespace

// One evaluation of F, G, min distance and the gradient: the per-step cost
// of every phase.
static void BM_Evaluate(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(s.x, s.shape, s.pot));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(1000)->Arg(5000);

static void BM_VirtualDiffusionStep(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  RngStream rng(1, 2);
  const IDSchedule one_step{1, s.params.alpha, s.params.dt};
  for (auto _ : state)
    benchmark::DoNotOptimize(virtual_diffusion(s.x, s.shape, s.pot, one_step, s.params, rng));
}
BENCHMARK(BM_VirtualDiffusionStep)->Arg(100)->Arg(1000);

static void BM_DescendToShape(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    RunRecord rec;
    rec.x_opt_energy = kInfinity;
    std::int64_t it = 0;
    benchmark::DoNotOptimize(descend_to_shape(s.x, s.shape, s.pot, s.params, rec, it, 1, 100));
  }
}
BENCHMARK(BM_DescendToShape)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
