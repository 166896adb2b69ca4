#include "otplan/potentials.hpp"

#include <cmath>
#include <numbers>

namespace otplan {

const char* to_string(Kernel kernel) {
  switch (kernel) {
    case Kernel::ExpBump:
      return "exp";
    case Kernel::Cotangent:
      return "cot";
  }
  return "?";
}

Kernel kernel_from_string(const std::string& name) {
  if (name == "exp") return Kernel::ExpBump;
  if (name == "cot") return Kernel::Cotangent;
  throw std::invalid_argument("unknown kernel '" + name + "' (expected exp or cot)");
}

double default_barrier_radius(double r, double R) { return r + 0.1 * (R - r); }

PotentialParams PotentialParams::table1(double r, Kernel kernel) {
  PotentialParams p;
  p.r = r;
  p.R = 10.0 * r;
  p.G0 = 0.01;
  p.kernel = kernel;
  p.m = default_barrier_radius(p.r, p.R);
  return p;
}

void PotentialParams::validate() const {
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  if (!(R > r)) throw std::invalid_argument("R must exceed r");
  if (!(G0 > 0.0)) throw std::invalid_argument("G0 must be positive");
  if (!(m > r && m < R)) throw std::invalid_argument("m must lie strictly between r and R");
}

double PotentialParams::interaction_radius() const {
  return kernel == Kernel::ExpBump ? 2.0 * R : R;
}

double PotentialParams::singular_distance() const {
  return kernel == Kernel::ExpBump ? 2.0 * r : 0.0;
}

double PotentialParams::barrier_distance() const {
  return kernel == Kernel::ExpBump ? 2.0 * m : m;
}

InfeasibleGradient::InfeasibleGradient(std::size_t i, std::size_t j)
    : std::runtime_error("repelling gradient requested inside the singular radius (robots " +
                         std::to_string(i) + ", " + std::to_string(j) + ")"),
      i_(i),
      j_(j) {}

// ---------------------------------------------------------------------------

double phi_exp(double x, double r, double R) {
  if (x <= r) return kInfinity;
  if (x >= R) return 0.0;
  const double x2 = x * x;
  return std::exp(1.0 / (x2 - r * r) - 1.0 / (R * R - x2));
}

double phi_exp_derivative(double x, double r, double R) {
  if (x <= r) return -kInfinity;
  if (x >= R) return 0.0;
  const double phi = phi_exp(x, r, R);
  if (phi == 0.0) return 0.0;
  const double x2 = x * x;
  const double a = x2 - r * r;
  const double b = R * R - x2;
  return phi * (-2.0 * x / (a * a) - 2.0 * x / (b * b));
}

double phi_cot(double sq_dist, double R) {
  const double R2 = R * R;
  if (sq_dist <= 0.0) return kInfinity;
  if (sq_dist >= R2) return 0.0;
  return 1.0 / std::tan(0.5 * std::numbers::pi * sq_dist / R2);
}

double phi_cot_derivative(double sq_dist, double R) {
  const double R2 = R * R;
  if (sq_dist <= 0.0) return -kInfinity;
  if (sq_dist >= R2) return 0.0;
  const double a = 0.5 * std::numbers::pi / R2;
  const double s = std::sin(a * sq_dist);
  return -a / (s * s);
}

double pair_energy(const PotentialParams& params, double sq_dist) {
  switch (params.kernel) {
    case Kernel::ExpBump:
      return params.G0 * phi_exp(0.5 * std::sqrt(sq_dist), params.r, params.R);
    case Kernel::Cotangent:
      return params.G0 * phi_cot(sq_dist, params.R);
  }
  return 0.0;
}

double pair_energy_slope(const PotentialParams& params, double sq_dist) {
  switch (params.kernel) {
    case Kernel::ExpBump: {
      // x = sqrt(s)/2, dx/ds = 1/(8x)
      const double x = 0.5 * std::sqrt(sq_dist);
      if (x <= params.r) return -kInfinity;
      return params.G0 * phi_exp_derivative(x, params.r, params.R) / (8.0 * x);
    }
    case Kernel::Cotangent:
      return params.G0 * phi_cot_derivative(sq_dist, params.R);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

double shape_potential_F(const Configuration& config, const Shape& shape) {
  double sum = 0.0;
  for (const auto& p : config) sum += shape.mu(p);
  return sum / static_cast<double>(config.size());
}

VectorField grad_F(const Configuration& config, const Shape& shape) {
  const double inv_n = 1.0 / static_cast<double>(config.size());
  VectorField g(config.size());
  for (std::size_t i = 0; i < config.size(); ++i) g[i] = inv_n * shape.grad_mu(config[i]);
  return g;
}

double repelling_G(const Configuration& config, const PotentialParams& params,
                   const PairList& neighbors) {
  double sum = 0.0;
  for (const auto& [i, j] : neighbors.pairs)
    sum += pair_energy(params, squared_distance(config[i], config[j]));
  return sum;
}

VectorField grad_G(const Configuration& config, const PotentialParams& params,
                   const PairList& neighbors) {
  VectorField g(config.size());
  for (const auto& [i, j] : neighbors.pairs) {
    const Vec2 diff = config[i] - config[j];
    const double slope = pair_energy_slope(params, squared_norm(diff));
    if (!std::isfinite(slope)) throw InfeasibleGradient(i, j);
    // d/dx_i of term(|x_i - x_j|^2) = 2 slope (x_i - x_j); x_j gets the opposite.
    const Vec2 f = (2.0 * slope) * diff;
    g[i] += f;
    g[j] -= f;
  }
  return g;
}

double target_potential_Fhat(const Configuration& config, const TargetSet& targets) {
  if (targets.targets.size() != config.size())
    throw std::invalid_argument("target count does not match robot count");
  double sum = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i)
    sum += squared_distance(config[i], targets.targets[i]);
  return sum / static_cast<double>(config.size());
}

VectorField grad_Fhat(const Configuration& config, const TargetSet& targets) {
  if (targets.targets.size() != config.size())
    throw std::invalid_argument("target count does not match robot count");
  const double scale = 2.0 / static_cast<double>(config.size());
  VectorField g(config.size());
  for (std::size_t i = 0; i < config.size(); ++i)
    g[i] = scale * (config[i] - targets.targets[i]);
  return g;
}

Energy energy_parts(const Configuration& config, const Shape& shape, const PotentialParams& params,
                    const PairList& neighbors) {
  return {shape_potential_F(config, shape), repelling_G(config, params, neighbors)};
}

double energy_Psi(const Configuration& config, const Shape& shape, const PotentialParams& params,
                  const PairList& neighbors) {
  return energy_parts(config, shape, params, neighbors).total();
}

double barrier_level_Em(const PotentialParams& params) {
  if (!(params.m > params.r && params.m < params.R))
    throw std::invalid_argument("m must lie strictly between r and R");
  switch (params.kernel) {
    case Kernel::ExpBump:
      return params.G0 * phi_exp(params.m, params.r, params.R);
    case Kernel::Cotangent:
      return params.G0 * phi_cot(params.m * params.m, params.R);
  }
  return 0.0;
}

}  // namespace otplan
