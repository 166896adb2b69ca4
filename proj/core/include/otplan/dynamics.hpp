#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "otplan/configuration.hpp"
#include "otplan/geometry.hpp"

namespace otplan {

/// Counter-based normal/uniform generator.
///
/// Every value is a pure function of (seed, stream, counter, lane): 64 bits
/// come from chained SplitMix64 finalizers, uniforms take the top 53 bits
/// shifted to the open interval (0, 1), and a standard normal 2-vector is
/// the Box-Muller transform of the uniforms at lanes (2k, 2k+1). The
/// stepping helpers use the robot index as the lane, so per-robot draws do
/// not depend on evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t bits(std::uint64_t counter, std::uint64_t lane) const;
  double uniform(std::uint64_t counter, std::uint64_t lane) const;
  Vec2 normal2(std::uint64_t counter, std::uint64_t lane) const;

  /// Returns the current counter and advances it.
  std::uint64_t next_counter() { return counter_++; }
  double next_uniform() { return uniform(next_counter(), 0); }

  /// Independent stream sharing the seed.
  RngStream substream(std::uint64_t id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct StepParams {
  double dt = 0.01;
  double sigma = 0.0;
  double domain_M = 6.0;

  void validate() const;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(std::size_t robot);
  std::size_t robot() const { return robot_; }

 private:
  std::size_t robot_;
};

/// All ordered pairs closer than `radius`, via a uniform hash grid with
/// cell size `radius`. Sorted lexicographically.
PairList neighbor_pairs(const Configuration& config, double radius);
PairList neighbor_pairs_brute_force(const Configuration& config, double radius);

/// Reflects out-of-range coordinates about the wall of [-M, M]^2:
/// c <- c - 2 sgn(c) (|c| mod M). Coordinates at or beyond 2M clamp to +-M.
Vec2 boundary_map(const Vec2& x, double M);

/// X_i - dt g_i, then boundary_map. Throws NonFiniteGradient.
Configuration euler_step(const Configuration& config, const VectorField& grad,
                         const StepParams& step);

/// X_i - dt g_i + sigma sqrt(dt) xi_i with xi_i = rng.normal2(c, i) for the
/// stream's current counter c; advances the counter once. With sigma == 0
/// the result is bit-identical to euler_step.
Configuration euler_maruyama_step(const Configuration& config, const VectorField& grad,
                                  const StepParams& step, RngStream& rng);

/// Smallest pairwise distance; +infinity for a single robot.
double min_pairwise_distance(const Configuration& config);
/// Same, restricted to a pair list already known to contain every pair
/// closer than `radius`; falls back to a full search if the list is empty.
double min_pairwise_distance(const Configuration& config, const PairList& pairs);
double min_pairwise_distance_brute_force(const Configuration& config);

/// max_i |a_i - b_i|
double max_displacement(const Configuration& a, const Configuration& b);

}  // namespace otplan
