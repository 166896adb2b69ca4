#include "otplan/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

namespace otplan {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed + kGolden) ^ (stream * kGolden + 1))) {}

std::uint64_t RngStream::bits(std::uint64_t counter, std::uint64_t lane) const {
  return mix64(mix64(key_ ^ mix64(counter + kGolden)) + lane * kGolden);
}

double RngStream::uniform(std::uint64_t counter, std::uint64_t lane) const {
  return (static_cast<double>(bits(counter, lane) >> 11) + 0.5) * 0x1.0p-53;
}

Vec2 RngStream::normal2(std::uint64_t counter, std::uint64_t lane) const {
  const double u1 = uniform(counter, 2 * lane);
  const double u2 = uniform(counter, 2 * lane + 1);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {rad * std::cos(theta), rad * std::sin(theta)};
}

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(seed_, mix64(stream_ * kGolden + id + 1));
}

void StepParams::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  if (!(domain_M > 0.0)) throw std::invalid_argument("domain size M must be positive");
}

NonFiniteGradient::NonFiniteGradient(std::size_t robot)
    : std::runtime_error("non-finite gradient for robot " + std::to_string(robot)), robot_(robot) {}

// ---------------------------------------------------------------------------

PairList neighbor_pairs_brute_force(const Configuration& config, double radius) {
  PairList out;
  const double r2 = radius * radius;
  for (std::uint32_t i = 0; i < config.size(); ++i)
    for (std::uint32_t j = 0; j < config.size(); ++j)
      if (i != j && squared_distance(config[i], config[j]) < r2) out.pairs.emplace_back(i, j);
  return out;
}

PairList neighbor_pairs(const Configuration& config, double radius) {
  const std::size_t n = config.size();
  if (n < 2 || !(radius > 0.0)) return {};

  Box2 box;
  for (const auto& p : config) box.expand(p);
  // Grid would be degenerate (or overflow) for radii spanning the cloud.
  if (!std::isfinite(radius) || radius * 1e6 < box.diagonal() || radius >= box.diagonal() || n < 16)
    return neighbor_pairs_brute_force(config, radius);

  struct Entry {
    std::int64_t cx, cy;
    std::uint32_t idx;
  };
  std::vector<Entry> cells(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    cells[i] = {static_cast<std::int64_t>(std::floor((config[i].x - box.lo.x) / radius)),
                static_cast<std::int64_t>(std::floor((config[i].y - box.lo.y) / radius)), i};
  }
  std::vector<Entry> sorted = cells;
  auto key_less = [](const Entry& a, const Entry& b) {
    return std::tie(a.cx, a.cy, a.idx) < std::tie(b.cx, b.cy, b.idx);
  };
  std::sort(sorted.begin(), sorted.end(), key_less);

  const double r2 = radius * radius;
  PairList out;
  std::vector<std::uint32_t> found;
  for (std::uint32_t i = 0; i < n; ++i) {
    found.clear();
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const Entry lo{cells[i].cx + dx, cells[i].cy + dy, 0};
        auto it = std::lower_bound(sorted.begin(), sorted.end(), lo, key_less);
        for (; it != sorted.end() && it->cx == lo.cx && it->cy == lo.cy; ++it) {
          if (it->idx != i && squared_distance(config[i], config[it->idx]) < r2)
            found.push_back(it->idx);
        }
      }
    }
    std::sort(found.begin(), found.end());
    for (auto j : found) out.pairs.emplace_back(i, j);
  }
  return out;
}

Vec2 boundary_map(const Vec2& x, double M) {
  auto fold = [M](double c) {
    const double a = std::abs(c);
    if (a <= M) return c;
    const double s = c > 0.0 ? 1.0 : -1.0;
    if (!(a < 2.0 * M)) return s * M;
    return c - 2.0 * s * std::fmod(a, M);
  };
  return {fold(x.x), fold(x.y)};
}

namespace {

void check_gradient(const Configuration& config, const VectorField& grad) {
  if (grad.size() != config.size())
    throw std::invalid_argument("gradient length does not match robot count");
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!is_finite(grad[i])) throw NonFiniteGradient(i);
}

}  // namespace

Configuration euler_step(const Configuration& config, const VectorField& grad,
                         const StepParams& step) {
  check_gradient(config, grad);
  Configuration next = config;
  for (std::size_t i = 0; i < config.size(); ++i)
    next[i] = boundary_map(config[i] - step.dt * grad[i], step.domain_M);
  return next;
}

Configuration euler_maruyama_step(const Configuration& config, const VectorField& grad,
                                  const StepParams& step, RngStream& rng) {
  check_gradient(config, grad);
  const std::uint64_t counter = rng.next_counter();
  if (step.sigma == 0.0) return euler_step(config, grad, step);
  const double scale = step.sigma * std::sqrt(step.dt);
  Configuration next = config;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const Vec2 xi = rng.normal2(counter, i);
    next[i] = boundary_map(config[i] - step.dt * grad[i] + scale * xi, step.domain_M);
  }
  return next;
}

// ---------------------------------------------------------------------------

double min_pairwise_distance_brute_force(const Configuration& config) {
  double best = kInfinity;
  for (std::size_t i = 0; i < config.size(); ++i)
    for (std::size_t j = i + 1; j < config.size(); ++j)
      best = std::min(best, squared_distance(config[i], config[j]));
  return std::sqrt(best);
}

double min_pairwise_distance(const Configuration& config, const PairList& pairs) {
  if (config.size() < 2) return kInfinity;
  if (pairs.empty()) return min_pairwise_distance(config);
  double best = kInfinity;
  for (const auto& [i, j] : pairs.pairs) best = std::min(best, squared_distance(config[i], config[j]));
  return std::sqrt(best);
}

double min_pairwise_distance(const Configuration& config) {
  const std::size_t n = config.size();
  if (n < 2) return kInfinity;
  Box2 box;
  for (const auto& p : config) box.expand(p);
  const double diag = box.diagonal();
  if (diag == 0.0) return 0.0;
  const PairList near = neighbor_pairs(config, 2.0 * diag / std::sqrt(static_cast<double>(n)));
  if (near.empty()) return min_pairwise_distance_brute_force(config);
  double best = kInfinity;
  for (const auto& [i, j] : near.pairs) best = std::min(best, squared_distance(config[i], config[j]));
  return std::sqrt(best);
}

double max_displacement(const Configuration& a, const Configuration& b) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, squared_distance(a[i], b[i]));
  return std::sqrt(best);
}

}  // namespace otplan
