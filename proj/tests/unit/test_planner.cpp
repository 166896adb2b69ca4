#include <gtest/gtest.h>

#include <cmath>

#include "otplan/planner.hpp"

using namespace otplan;

namespace {

PlannerParams small_params(double r, const Shape& shape) {
  PlannerParams p = PlannerParams::table1(r, shape);
  p.outer_cap = 3;
  p.s_max = 200;
  p.step4_cap = 400;
  p.gd_cap = 2000;
  p.tau = 1e-6;
  return p;
}

struct Scene {
  Shape shape{shapes::circle({0, 0}, 2.0, 120)};
  PotentialParams pot = PotentialParams::table1(0.1);
  Configuration start;

  explicit Scene(std::size_t n = 8, std::uint64_t seed = 3) {
    RngStream rng(seed, 3);
    start = initial_configuration(InitMode::Random, n, pot, 3.0, rng);
  }
};

}  // namespace

TEST(Schedule, SamplesWithinRangeAndFloorsSteps) {
  RngStream rng(4, 1);
  for (int c = 1; c <= 200; ++c) {
    const IDSchedule s = sample_schedule(rng, 0.1, 10.0, c);
    EXPECT_EQ(s.cycle, c);
    EXPECT_GE(s.sigma, 0.0);
    EXPECT_LE(s.sigma, 0.1);
    EXPECT_GE(s.duration, 0.0);
    EXPECT_LE(s.duration, 10.0);
  }
  EXPECT_EQ((IDSchedule{1, 0.1, 0.005}).steps(0.01), 0);
  EXPECT_EQ((IDSchedule{1, 0.1, 0.05}).steps(0.01), 5);
}

TEST(VirtualDiffusion, ZeroStepsReturnsStart) {
  Scene sc;
  const PlannerParams p = small_params(0.1, sc.shape);
  RngStream rng(1, 2);
  std::vector<RecordRow> rows;
  const TargetSet t = virtual_diffusion(sc.start, sc.shape, sc.pot, {1, 0.1, 0.0}, p, rng, &rows);
  EXPECT_TRUE(rows.empty());
  EXPECT_EQ(Configuration(t.targets), sc.start);
}

TEST(VirtualDiffusion, DeterministicForFixedStream) {
  Scene sc;
  const PlannerParams p = small_params(0.1, sc.shape);
  RngStream a(9, 2), b(9, 2);
  const IDSchedule s{1, 0.05, 0.5};
  EXPECT_EQ(virtual_diffusion(sc.start, sc.shape, sc.pot, s, p, a).targets,
            virtual_diffusion(sc.start, sc.shape, sc.pot, s, p, b).targets);
}

TEST(VirtualDiffusion, SpreadMatchesBrownianVarianceOnFlatRegion) {
  // A single robot far from a single-point shape whose pull is negligible
  // over the episode is dominated by the noise: Var = sigma^2 T per axis.
  const Shape shape({{0, 0}});
  const PotentialParams pot = PotentialParams::table1(0.1);
  PlannerParams p = small_params(0.1, shape);
  p.dt = 1e-3;
  const Configuration start({{0.0, 0.0}});
  const IDSchedule s{1, 0.5, 0.2};
  double sum = 0.0, sumsq = 0.0;
  const int seeds = 500;
  for (int k = 0; k < seeds; ++k) {
    RngStream rng(static_cast<std::uint64_t>(k + 1), 2);
    const Vec2 y = virtual_diffusion(start, shape, pot, s, p, rng).targets[0];
    sum += y.x;
    sumsq += y.x * y.x;
  }
  // The quadratic well (grad 2x) shrinks the variance slightly:
  // Var = sigma^2 (1 - e^{-4T}) / 4 for the OU limit.
  const double expected = s.sigma * s.sigma * (1.0 - std::exp(-4.0 * s.duration)) / 4.0;
  const double var = sumsq / seeds - (sum / seeds) * (sum / seeds);
  EXPECT_NEAR(var / expected, 1.0, 0.1);
}

TEST(DescendToTargets, TargetsAtStartStopImmediately) {
  const Shape shape({{0, 0}});
  const PotentialParams pot = PotentialParams::table1(0.1);
  PlannerParams p = small_params(0.1, shape);
  const Configuration start({{0, 0}});
  RunRecord rec;
  std::int64_t it = 0;
  const Configuration x = descend_to_targets(start, {{{0, 0}}}, shape, pot, p, rec, it, 1);
  EXPECT_EQ(it, 1);
  EXPECT_EQ(x, start);
  ASSERT_EQ(rec.rows.size(), 1u);
  EXPECT_EQ(rec.rows[0].phase, Phase::DescendToTargets);
}

TEST(DescendToTargets, RespectsIterationCap) {
  const Shape shape({{0, 0}});
  const PotentialParams pot = PotentialParams::table1(0.1);
  PlannerParams p = small_params(0.1, shape);
  p.s_max = 1;
  RunRecord rec;
  std::int64_t it = 10;
  descend_to_targets(Configuration({{1, 1}}), {{{-2, 0}}}, shape, pot, p, rec, it, 1);
  EXPECT_EQ(it, 11);
  EXPECT_EQ(rec.rows.size(), 1u);
  EXPECT_EQ(rec.rows[0].iteration, 11);
}

TEST(PlanId, ConvergedStartDoesNoCycles) {
  const Shape shape(shapes::circle({0, 0}, 2.0, 40));
  const PotentialParams pot = PotentialParams::table1(0.1);
  const PlannerParams p = small_params(0.1, shape);
  // Robots on shape points far apart: F = 0, G = 0.
  const Configuration start({shape.points()[0], shape.points()[20]});
  const RunRecord rec = plan_id(start, shape, pot, p);
  EXPECT_EQ(rec.cycles, 0);
  EXPECT_EQ(rec.status, RunStatus::ConvergedEpsilon);
  EXPECT_EQ(rec.physical_iterations, 0);
  EXPECT_EQ(rec.x_opt, start);
  ASSERT_EQ(rec.rows.size(), 1u);
  EXPECT_EQ(rec.rows[0].phase, Phase::Initial);
}

TEST(PlanGd, OnShapeStartStopsAfterOneStep) {
  const Shape shape(shapes::circle({0, 0}, 2.0, 40));
  const PotentialParams pot = PotentialParams::table1(0.1);
  const PlannerParams p = small_params(0.1, shape);
  const Configuration start({shape.points()[0], shape.points()[20]});
  const RunRecord rec = plan_gd(start, shape, pot, p);
  EXPECT_EQ(rec.physical_iterations, 1);
  EXPECT_EQ(rec.status, RunStatus::DisplacementBelowTau);
  EXPECT_EQ(rec.final_config, start);
}

TEST(PlanId, ReproducibleForFixedSeed) {
  Scene sc;
  const PlannerParams p = small_params(0.1, sc.shape);
  const RunRecord a = plan_id(sc.start, sc.shape, sc.pot, p);
  const RunRecord b = plan_id(sc.start, sc.shape, sc.pot, p);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].iteration, b.rows[k].iteration);
    EXPECT_EQ(a.rows[k].psi, b.rows[k].psi);
  }
  EXPECT_EQ(a.final_config, b.final_config);
  EXPECT_EQ(a.x_opt, b.x_opt);

  PlannerParams q = p;
  q.seed = p.seed + 1;
  EXPECT_NE(plan_id(sc.start, sc.shape, sc.pot, q).final_config, a.final_config);
}

TEST(PlanId, IncumbentNeverWorsensAndMatchesBestStep4Row) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Scene sc(10, seed);
    PlannerParams p = small_params(0.1, sc.shape);
    p.seed = seed;
    p.outer_cap = 4;
    p.epsilon = 1e-300;
    const RunRecord rec = plan_id(sc.start, sc.shape, sc.pot, p);
    ASSERT_EQ(rec.x_opt_by_cycle.size(), static_cast<std::size_t>(rec.cycles));
    for (std::size_t c = 1; c < rec.x_opt_by_cycle.size(); ++c)
      EXPECT_LE(rec.x_opt_by_cycle[c], rec.x_opt_by_cycle[c - 1]);
    double best = rec.rows.front().psi;
    for (const auto& row : rec.rows)
      if (row.phase == Phase::DescendToShape) best = std::min(best, row.psi);
    EXPECT_EQ(rec.x_opt_energy, best);
    EXPECT_EQ(rec.status, RunStatus::OuterCapReached);
  }
}

TEST(PlanId, DescendToShapeIsMonotone) {
  Scene sc(12, 5);
  PlannerParams p = small_params(0.1, sc.shape);
  p.outer_cap = 3;
  p.epsilon = 1e-300;
  const RunRecord rec = plan_id(sc.start, sc.shape, sc.pot, p);
  const auto rows = rec.physical_rows();
  int checked = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].phase != Phase::DescendToShape) continue;
    EXPECT_LE(rows[k].psi, rows[k - 1].psi + 1e-12) << "iteration " << rows[k].iteration;
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(PlanId, PhysicalPathIsContinuousAcrossVirtualEpisodes) {
  Scene sc(8, 2);
  PlannerParams p = small_params(0.1, sc.shape);
  p.epsilon = 1e-300;
  p.snapshot_stride = 1;
  const RunRecord rec = plan_id(sc.start, sc.shape, sc.pot, p);
  // Physical iterations are consecutive; virtual rows do not consume them.
  const auto rows = rec.physical_rows();
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(rows[k].iteration, rows[k - 1].iteration + 1);
  // Every physical move is a single small gradient step, never a jump to
  // the virtual end state.
  const double max_step = p.dt * 1e3;
  for (std::size_t k = 1; k < rec.snapshots.size(); ++k) {
    if (rec.snapshots[k].iteration == rec.snapshots[k - 1].iteration + 1) {
      EXPECT_LT(max_displacement(rec.snapshots[k].config, rec.snapshots[k - 1].config), max_step);
    }
  }
  EXPECT_EQ(rec.physical_iterations, rows.back().iteration);
}

TEST(PlanId, SingleRobotConvexCaseMatchesGd) {
  const Shape shape({{1.0, -0.5}});
  const PotentialParams pot = PotentialParams::table1(0.1);
  PlannerParams p = small_params(0.1, shape);
  p.epsilon = 1e-8;
  p.outer_cap = 5;
  p.step4_cap = 5000;
  p.gd_cap = 5000;
  const Configuration start({{-2.0, 2.0}});
  const RunRecord id = plan_id(start, shape, pot, p);
  const RunRecord gd = plan_gd(start, shape, pot, p);
  EXPECT_NEAR(id.x_opt_energy, gd.x_opt_energy, 1e-6);
  EXPECT_LT(id.x_opt_energy, 1e-6);
}

TEST(InitialConfiguration, RespectsSeparationAndDomain) {
  const PotentialParams pot = PotentialParams::table1(0.1);
  for (InitMode mode : {InitMode::Random, InitMode::Corner}) {
    RngStream rng(11, 3);
    const Configuration x = initial_configuration(mode, 60, pot, 6.0, rng);
    EXPECT_EQ(x.size(), 60u);
    EXPECT_GT(min_pairwise_distance(x), pot.barrier_distance());
    for (const auto& p : x) {
      EXPECT_LE(std::abs(p.x), 6.0);
      EXPECT_LE(std::abs(p.y), 6.0);
    }
  }
  RngStream rng(1);
  EXPECT_THROW(initial_configuration(InitMode::Random, 100, pot, 0.1, rng, 1.0), std::runtime_error);
  EXPECT_THROW(initial_configuration(InitMode::Random, 0, pot, 6.0, rng), std::invalid_argument);
}

TEST(PlannerParams, Table1AndValidation) {
  const Shape shape(shapes::circle({0, 0}, 3.0, 200));
  const PlannerParams p = PlannerParams::table1(0.05, shape);
  EXPECT_DOUBLE_EQ(p.dt, 0.005);
  EXPECT_DOUBLE_EQ(p.alpha, 0.05);
  EXPECT_DOUBLE_EQ(p.beta, 10.0);
  EXPECT_DOUBLE_EQ(p.domain_M, 6.0);
  const double h = shape.sampling_resolution();
  EXPECT_DOUBLE_EQ(p.epsilon, 2 * h * h);
  PlannerParams bad = p;
  bad.dt = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_EQ(phase_from_string(to_string(Phase::DescendToShape)), Phase::DescendToShape);
  EXPECT_THROW(phase_from_string("nope"), std::invalid_argument);
}
