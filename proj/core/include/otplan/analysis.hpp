#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "otplan/configuration.hpp"
#include "otplan/dynamics.hpp"
#include "otplan/planner.hpp"
#include "otplan/potentials.hpp"
#include "otplan/shape.hpp"

namespace otplan {

using ScalarField = std::function<double(const Configuration&)>;

/// Central differences of `potential` in every coordinate. Throws
/// std::domain_error if a probe evaluates to a non-finite value.
VectorField fd_gradient(const ScalarField& potential, const Configuration& config, double h);

/// |a - b| / max(|a|, |b|) over the whole configuration; 0 when both vanish.
double relative_error(const VectorField& a, const VectorField& b);

struct GradientCheck {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_relative_error = 0.0;

  bool pass() const { return failures == 0; }
};

/// Analytic grad_F, grad_G (both kernels) and grad_Fhat against fd_gradient
/// on random instances with N <= 20. Instances where a robot is within
/// 1e-3 of tying between two shape points, or a pair is within 1e-3 of a
/// kernel cutoff, are redrawn.
std::vector<GradientCheck> gradient_oracle_suite(std::size_t instances, std::uint64_t seed,
                                                 double h = 1e-5, double tolerance = 1e-5);

/// Selects which energy an oracle works on: F (shape) or F-hat (targets),
/// plus G unless repulsion is switched off.
struct PotentialModel {
  const Shape* shape = nullptr;
  const TargetSet* targets = nullptr;
  PotentialParams params;
  bool repulsion = true;
  bool attraction = true;  // false: G alone

  double value(const Configuration& x) const;
  VectorField gradient(const Configuration& x) const;
  /// Gradient with each robot's nearest shape point taken from `anchor`
  /// rather than from x: the gradient of the smooth quadratic piece of F
  /// that contains `anchor`.
  VectorField gradient_on_piece(const Configuration& x, const Configuration& anchor) const;
};

/// Draws feasible configurations for the Lipschitz estimate.
struct ConfigurationSampler {
  std::function<Configuration(RngStream&)> draw;

  /// N robots uniform on [-M, M]^2, pairwise farther apart than `min_separation`.
  static ConfigurationSampler uniform(std::size_t count, const PotentialParams& pot,
                                      double domain_M, double min_separation);
  /// Uniform choice among recorded configurations (e.g. a run's snapshots).
  static ConfigurationSampler from_configurations(std::vector<Configuration> configs);
};

struct LipschitzEstimate {
  double L_hat = 0.0;      // safety factor x raw ratio
  double max_ratio = 0.0;  // largest |grad(X) - grad(Z)| / |X - Z| seen
  std::size_t sample_count = 0;
  Configuration max_ratio_first;
  Configuration max_ratio_second;

  /// dt <= 1 / L_hat
  bool admits(double dt) const { return dt * L_hat <= 1.0; }
};

inline constexpr double kLipschitzSafetyFactor = 2.0;

/// Empirical Lipschitz constant of the model's gradient. Each sample
/// contributes a nearby pair (X, X + delta u, |u| = 1, compared on X's smooth
/// piece of F) and a distant pair (X, Y) of independent draws.
LipschitzEstimate estimate_lipschitz(const PotentialModel& model,
                                     const ConfigurationSampler& sampler,
                                     std::size_t n_samples, RngStream& rng,
                                     double perturbation = 1e-4);

enum class CertificateStatus { Pass, Fail, PreconditionNotMet };
const char* to_string(CertificateStatus status);

struct CollisionReport {
  CertificateStatus status = CertificateStatus::Pass;
  double initial_energy = 0.0;
  double barrier_level = 0.0;     // E_m
  double threshold = 0.0;         // r
  double min_distance = kInfinity;
  std::size_t rows_checked = 0;
  std::optional<std::int64_t> violating_iteration;
  std::optional<std::int64_t> violating_cycle;

  bool pass() const { return status == CertificateStatus::Pass; }
};

/// (a) Psi(X0) < E_m and (b) min pairwise distance >= r on every physical
/// row. Single-robot records pass vacuously.
CollisionReport collision_certificate(const RunRecord& record, const PotentialParams& pot);

struct DescentReport {
  std::size_t steps_checked = 0;
  std::size_t violations = 0;
  double worst_increase = 0.0;
  std::optional<std::int64_t> first_violation;

  bool pass() const { return violations == 0; }
};

/// Psi must not increase across any step of the shape-descent flow (every
/// DescendToShape row against its physical predecessor).
DescentReport descent_check(const RunRecord& record, double tolerance = 1e-12);

/// True if the incumbent energy never increases across cycles.
bool x_opt_monotone(const RunRecord& record);

struct GibbsCheck {
  std::size_t resolution = 0;
  double domain_M = 0.0;
  std::vector<double> empirical_mass;  // row-major, resolution^2 cells
  std::vector<double> gibbs_mass;
  double tv_distance = 0.0;
  double empirical_left = 0.0;  // mass with x < 0
  double empirical_right = 0.0;
  double gibbs_left = 0.0;
  double gibbs_right = 0.0;
};

struct GibbsCheckParams {
  double sigma = 0.8;
  double dt = 1e-3;
  std::int64_t n_steps = 2'000'000;  // kept samples, after burn-in
  std::int64_t burn_in = 10'000;
  std::size_t resolution = 32;
  double domain_M = 6.0;
};

/// Single-robot Euler-Maruyama chain on mu, histogrammed after burn-in and
/// compared with exp(-2 mu / sigma^2) normalized over the grid by midpoint
/// quadrature. Throws std::invalid_argument for sigma <= 0.
GibbsCheck gibbs_check(const Shape& shape, const GibbsCheckParams& params, RngStream& rng);

/// Same check for an arbitrary single-robot potential, started at `start`.
GibbsCheck gibbs_check(const std::function<double(const Vec2&)>& psi,
                       const std::function<Vec2(const Vec2&)>& grad, const Vec2& start,
                       const GibbsCheckParams& params, RngStream& rng);

struct RunMetrics {
  double psi = 0.0;
  double shape_part = 0.0;
  double repel_part = 0.0;
  double on_shape_fraction = 0.0;  // robots with mu < epsilon / N
  double nn_mean = 0.0;            // mean nearest-neighbour distance
  double nn_cv = 0.0;              // its coefficient of variation
  std::int64_t iterations = 0;
  std::int64_t cycles = 0;
};

/// Metrics of the run's best configuration.
RunMetrics run_metrics(const RunRecord& record, const Shape& shape, const PotentialParams& pot,
                       double epsilon);
RunMetrics configuration_metrics(const Configuration& config, const Shape& shape,
                                 const PotentialParams& pot, double epsilon);

struct MetricsDelta {
  double psi = 0.0;
  double shape_part = 0.0;
  double repel_part = 0.0;
  double on_shape_fraction = 0.0;
  double nn_cv = 0.0;
};

/// first - second, field by field.
MetricsDelta compare_metrics(const RunMetrics& first, const RunMetrics& second);

}  // namespace otplan
