#pragma once

#include <stdexcept>
#include <string>

#include "otplan/configuration.hpp"
#include "otplan/geometry.hpp"
#include "otplan/shape.hpp"

namespace otplan {

/// Repelling kernel variants.
///
/// ExpBump evaluates phi at half the pairwise distance, so in distance units
/// its singular radius is 2r and its cutoff is 2R; r, R and m are given in
/// half-distance units. Cotangent takes the squared distance directly: it is
/// singular only at d = 0, cuts off at d = R, and r, R, m are distances.
enum class Kernel { ExpBump, Cotangent };

const char* to_string(Kernel kernel);
Kernel kernel_from_string(const std::string& name);

struct PotentialParams {
  double r = 0.1;       // hard collision radius
  double R = 1.0;       // sensing radius, R > r
  double G0 = 0.01;     // repelling amplitude
  Kernel kernel = Kernel::Cotangent;
  double m = 0.19;      // barrier radius, r < m < R

  /// G0 = 0.01, R = 10 r and the default barrier radius.
  static PotentialParams table1(double r, Kernel kernel = Kernel::Cotangent);

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  /// Pairs at or beyond this distance do not interact.
  double interaction_radius() const;
  /// Pairs at or inside this distance have infinite repelling energy.
  double singular_distance() const;
  /// Distance corresponding to the barrier radius m.
  double barrier_distance() const;
};

/// m = r + 0.1 (R - r).
double default_barrier_radius(double r, double R);

/// Raised when a gradient is requested at a configuration where some pair
/// sits at or inside the kernel's singular radius.
class InfeasibleGradient : public std::runtime_error {
 public:
  InfeasibleGradient(std::size_t i, std::size_t j);
  std::size_t first() const { return i_; }
  std::size_t second() const { return j_; }

 private:
  std::size_t i_;
  std::size_t j_;
};

// Kernels. Infinite values mark states inside the singular radius.
double phi_exp(double x, double r, double R);
double phi_exp_derivative(double x, double r, double R);
double phi_cot(double sq_dist, double R);
/// Derivative of phi_cot with respect to its squared-distance argument.
double phi_cot_derivative(double sq_dist, double R);

/// Contribution of one ordered pair to G, as a function of squared distance.
double pair_energy(const PotentialParams& params, double sq_dist);
/// d(pair_energy)/d(sq_dist); -infinity at or inside the singular radius.
double pair_energy_slope(const PotentialParams& params, double sq_dist);

double shape_potential_F(const Configuration& config, const Shape& shape);
VectorField grad_F(const Configuration& config, const Shape& shape);

double repelling_G(const Configuration& config, const PotentialParams& params,
                   const PairList& neighbors);
VectorField grad_G(const Configuration& config, const PotentialParams& params,
                   const PairList& neighbors);

/// Throws std::invalid_argument on a length mismatch.
double target_potential_Fhat(const Configuration& config, const TargetSet& targets);
VectorField grad_Fhat(const Configuration& config, const TargetSet& targets);

struct Energy {
  double attraction = 0.0;  // F or F-hat
  double repulsion = 0.0;   // G
  double total() const { return attraction + repulsion; }
};

Energy energy_parts(const Configuration& config, const Shape& shape, const PotentialParams& params,
                    const PairList& neighbors);
double energy_Psi(const Configuration& config, const Shape& shape, const PotentialParams& params,
                  const PairList& neighbors);

/// E_m = G0 phi(m); throws std::invalid_argument unless r < m < R.
double barrier_level_Em(const PotentialParams& params);

}  // namespace otplan
