#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "otplan/analysis.hpp"

using namespace otplan;

namespace {

RunRecord record_with_rows(std::vector<RecordRow> rows, std::size_t robots) {
  RunRecord rec;
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < robots; ++i) pts.push_back({static_cast<double>(i), 0.0});
  rec.initial = Configuration(pts);
  rec.rows = std::move(rows);
  return rec;
}

RecordRow row(std::int64_t it, Phase phase, double psi, double min_distance = 1.0, std::int64_t cycle = 0) {
  RecordRow r;
  r.iteration = it;
  r.cycle = cycle;
  r.phase = phase;
  r.psi = psi;
  r.objective = psi;
  r.min_distance = min_distance;
  return r;
}

}  // namespace

TEST(FdGradient, QuadraticAndConstant) {
  const Configuration x({{1.0, -2.0}, {0.5, 3.0}});
  const ScalarField quad = [](const Configuration& c) {
    double s = 0;
    for (const auto& p : c) s += p.x * p.x + 3 * p.y * p.y;
    return s;
  };
  const VectorField g = fd_gradient(quad, x, 1e-5);
  EXPECT_NEAR(g[0].x, 2.0, 1e-8);
  EXPECT_NEAR(g[0].y, -12.0, 1e-8);
  EXPECT_NEAR(g[1].x, 1.0, 1e-8);
  EXPECT_NEAR(g[1].y, 18.0, 1e-8);

  const VectorField z = fd_gradient([](const Configuration&) { return 4.2; }, x, 1e-5);
  for (const auto& v : z) EXPECT_EQ(v, (Vec2{0, 0}));
}

TEST(FdGradient, NonFiniteProbeThrows) {
  const Configuration x({{0.0, 0.0}});
  const ScalarField wall = [](const Configuration& c) { return c[0].x > 0 ? INFINITY : 0.0; };
  EXPECT_THROW(fd_gradient(wall, x, 1e-5), std::domain_error);
}

TEST(RelativeError, Conventions) {
  EXPECT_EQ(relative_error({{0, 0}}, {{0, 0}}), 0.0);
  EXPECT_DOUBLE_EQ(relative_error({{3, 4}}, {{0, 0}}), 1.0);
  EXPECT_NEAR(relative_error({{1, 0}}, {{1.1, 0}}), 0.1 / 1.1, 1e-15);
}

TEST(Lipschitz, PureTargetPotentialIsTwoOverN) {
  const std::size_t n = 10;
  std::vector<Vec2> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({0.3 * static_cast<double>(i), -1.0});
  const TargetSet targets{t};
  PotentialModel model;
  model.targets = &targets;
  model.params = PotentialParams::table1(0.1);
  model.repulsion = false;
  RngStream rng(1, 5);
  const auto sampler = ConfigurationSampler::uniform(n, model.params, 6.0, 0.5);
  const LipschitzEstimate est = estimate_lipschitz(model, sampler, 50, rng);
  const double exact = 2.0 / static_cast<double>(n);
  EXPECT_NEAR(est.max_ratio, exact, 1e-6 * exact);
  EXPECT_DOUBLE_EQ(est.L_hat, kLipschitzSafetyFactor * est.max_ratio);
  EXPECT_LE(est.L_hat, 2 * exact * (1 + 1e-6));
  EXPECT_GE(est.L_hat, exact);
  EXPECT_TRUE(est.admits(1.0 / est.L_hat));
  EXPECT_FALSE(est.admits(1.01 / est.L_hat));
}

TEST(Lipschitz, ScalesLinearlyWithRepellingAmplitude) {
  PotentialModel model;
  model.params = PotentialParams::table1(0.1, Kernel::ExpBump);
  model.attraction = false;
  const auto sampler = ConfigurationSampler::uniform(10, model.params, 1.0, 0.3);
  RngStream a(2, 5);
  const LipschitzEstimate base = estimate_lipschitz(model, sampler, 100, a);
  ASSERT_GT(base.L_hat, 0.0);
  model.params.G0 *= 2.0;
  RngStream b(2, 5);
  const LipschitzEstimate doubled = estimate_lipschitz(model, sampler, 100, b);
  EXPECT_NEAR(doubled.L_hat / base.L_hat, 2.0, 1e-9);
}

TEST(Lipschitz, FiniteOnShapeModelWithRecordedConfigurations) {
  const Shape shape(shapes::circle({0, 0}, 2.0, 100));
  PotentialModel model;
  model.shape = &shape;
  model.params = PotentialParams::table1(0.1);
  RngStream init(3, 3);
  std::vector<Configuration> seen;
  for (int k = 0; k < 5; ++k)
    seen.push_back(initial_configuration(InitMode::Random, 10, model.params, 4.0, init));
  RngStream rng(3, 5);
  const LipschitzEstimate est =
      estimate_lipschitz(model, ConfigurationSampler::from_configurations(seen), 100, rng);
  EXPECT_TRUE(std::isfinite(est.L_hat));
  EXPECT_GT(est.L_hat, 0.0);
  // Distant pairs that draw the same recorded configuration twice are skipped.
  EXPECT_GT(est.sample_count, 100u);
  EXPECT_LE(est.sample_count, 200u);
  EXPECT_THROW(ConfigurationSampler::from_configurations({}), std::invalid_argument);
}

TEST(CollisionCertificate, SingleRobotPassesVacuously) {
  const PotentialParams pot = PotentialParams::table1(0.1);
  const RunRecord rec = record_with_rows({row(0, Phase::Initial, 0.5, kInfinity)}, 1);
  const CollisionReport rep = collision_certificate(rec, pot);
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.status, CertificateStatus::Pass);
}

TEST(CollisionCertificate, FlagsFirstViolatingRow) {
  const PotentialParams pot = PotentialParams::table1(0.1);
  const double em = barrier_level_Em(pot);
  const RunRecord rec = record_with_rows({row(0, Phase::Initial, 0.5 * em, 0.5),
                                          row(1, Phase::DescendToTargets, 0.1, 0.3, 1),
                                          row(2, Phase::DescendToShape, 0.1, pot.r / 2, 1),
                                          row(3, Phase::DescendToShape, 0.1, pot.r / 4, 1)},
                                         3);
  const CollisionReport rep = collision_certificate(rec, pot);
  EXPECT_EQ(rep.status, CertificateStatus::Fail);
  ASSERT_TRUE(rep.violating_iteration.has_value());
  EXPECT_EQ(*rep.violating_iteration, 2);
  EXPECT_EQ(*rep.violating_cycle, 1);
  EXPECT_DOUBLE_EQ(rep.min_distance, pot.r / 4);
  EXPECT_EQ(std::string(to_string(rep.status)), "FAIL");
}

TEST(CollisionCertificate, IgnoresVirtualRowsAndChecksPrecondition) {
  const PotentialParams pot = PotentialParams::table1(0.1);
  const double em = barrier_level_Em(pot);
  RunRecord rec = record_with_rows({row(0, Phase::Initial, 0.5 * em, 0.5),
                                    row(1, Phase::VirtualDiffusion, 0.1, 0.0, 1),
                                    row(1, Phase::DescendToTargets, 0.1, 0.4, 1)},
                                   2);
  EXPECT_TRUE(collision_certificate(rec, pot).pass());
  EXPECT_EQ(collision_certificate(rec, pot).rows_checked, 2u);
  rec.rows[0].psi = 2 * em;
  EXPECT_EQ(collision_certificate(rec, pot).status, CertificateStatus::PreconditionNotMet);
  EXPECT_THROW(collision_certificate(RunRecord{}, pot), std::invalid_argument);
}

TEST(DescentCheck, DetectsIncreaseOnShapeDescentOnly) {
  const RunRecord rec = record_with_rows({row(0, Phase::Initial, 1.0), row(1, Phase::DescendToTargets, 2.0),
                                          row(2, Phase::DescendToShape, 1.5),
                                          row(3, Phase::DescendToShape, 1.4),
                                          row(3, Phase::VirtualDiffusion, 9.0),
                                          row(4, Phase::DescendToShape, 1.6),
                                          row(5, Phase::DescendToShape, 1.6 + 1e-13)},
                                         2);
  const DescentReport rep = descent_check(rec);
  EXPECT_EQ(rep.steps_checked, 4u);
  EXPECT_EQ(rep.violations, 1u);
  ASSERT_TRUE(rep.first_violation.has_value());
  EXPECT_EQ(*rep.first_violation, 4);
  EXPECT_NEAR(rep.worst_increase, 0.2, 1e-12);
  EXPECT_FALSE(rep.pass());
}

TEST(DescentCheck, RealRunHasNoViolations) {
  // The exp bump is smooth at its cutoff; the cotangent kernel's slope jumps
  // there, so descent on it may rise by ~1e-5 when a pair crosses R.
  const Shape shape(shapes::circle({0, 0}, 2.0, 120));
  const PotentialParams pot = PotentialParams::table1(0.1, Kernel::ExpBump);
  PlannerParams p = PlannerParams::table1(0.1, shape);
  p.outer_cap = 3;
  p.s_max = 200;
  p.step4_cap = 400;
  RngStream rng(5, 3);
  const Configuration x0 = initial_configuration(InitMode::Random, 10, pot, 3.0, rng);
  const RunRecord rec = plan_id(x0, shape, pot, p);
  EXPECT_TRUE(descent_check(rec).pass());
  EXPECT_TRUE(x_opt_monotone(rec));
  EXPECT_TRUE(collision_certificate(rec, pot).pass());
}

TEST(Gibbs, RejectsNonPositiveSigma) {
  const Shape shape({{0, 0}});
  GibbsCheckParams gp;
  gp.sigma = 0.0;
  RngStream rng(1);
  EXPECT_THROW(gibbs_check(shape, gp, rng), std::invalid_argument);
}

TEST(Gibbs, FlatPotentialIsUniform) {
  GibbsCheckParams gp;
  gp.sigma = 3.0;
  gp.dt = 1e-2;
  gp.n_steps = 300000;
  gp.burn_in = 1000;
  gp.resolution = 8;
  RngStream rng(2);
  const GibbsCheck g = gibbs_check([](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2{0, 0}; },
                                   {0, 0}, gp, rng);
  for (double m : g.gibbs_mass) EXPECT_NEAR(m, 1.0 / 64, 1e-12);
  EXPECT_LT(g.tv_distance, 0.1);
  const double total = std::accumulate(g.empirical_mass.begin(), g.empirical_mass.end(), 0.0);
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Gibbs, SymmetricWellsGetEqualMass) {
  const Shape wells({{-1, 0}, {1, 0}});
  GibbsCheckParams gp;
  gp.sigma = 1.0;
  gp.dt = 1e-2;
  gp.n_steps = 1000000;
  gp.resolution = 16;
  RngStream rng(3);
  const GibbsCheck g = gibbs_check(wells, gp, rng);
  EXPECT_NEAR(g.gibbs_left, g.gibbs_right, 1e-9);
  EXPECT_NEAR(g.empirical_left + g.empirical_right, 1.0, 1e-9);
  EXPECT_LT(std::abs(g.empirical_left - g.empirical_right) / std::max(g.empirical_left, g.empirical_right),
            0.1);
  EXPECT_LT(g.tv_distance, 0.1);
}

TEST(Gibbs, LongerChainsGetCloser) {
  const Shape wells({{-1, 0}, {1, 0}});
  GibbsCheckParams gp;
  gp.sigma = 1.0;
  gp.dt = 1e-2;
  gp.resolution = 8;
  double short_tv = 0, long_tv = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    gp.n_steps = 5000;
    RngStream a(seed, 4);
    short_tv += gibbs_check(wells, gp, a).tv_distance;
    gp.n_steps = 50000;
    RngStream b(seed, 4);
    long_tv += gibbs_check(wells, gp, b).tv_distance;
  }
  EXPECT_LT(long_tv, short_tv);
}

TEST(Metrics, EvenlySpacedRobotsOnShape) {
  const Shape shape(shapes::circle({0, 0}, 3.0, 200));
  const PotentialParams pot = PotentialParams::table1(0.1);
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k < 200; k += 10) pts.push_back(shape.points()[k]);
  const RunMetrics m = configuration_metrics(Configuration(pts), shape, pot, 1e-3);
  EXPECT_EQ(m.on_shape_fraction, 1.0);
  EXPECT_EQ(m.shape_part, 0.0);
  EXPECT_NEAR(m.nn_cv, 0.0, 1e-9);
  EXPECT_NEAR(m.nn_mean, 2 * 3.0 * std::sin(M_PI / 20), 1e-9);
}

TEST(Metrics, DeltaIsFieldwiseDifference) {
  RunMetrics a, b;
  a.psi = 1.0;
  a.shape_part = 0.25;
  a.repel_part = 0.75;
  a.on_shape_fraction = 0.5;
  a.nn_cv = 0.2;
  b.psi = 0.5;
  b.shape_part = 0.5;
  b.repel_part = 0.0;
  b.on_shape_fraction = 1.0;
  b.nn_cv = 0.1;
  const MetricsDelta d = compare_metrics(a, b);
  EXPECT_EQ(d.psi, 0.5);
  EXPECT_EQ(d.shape_part, -0.25);
  EXPECT_EQ(d.repel_part, 0.75);
  EXPECT_EQ(d.on_shape_fraction, -0.5);
  EXPECT_EQ(d.nn_cv, 0.2 - 0.1);
}
