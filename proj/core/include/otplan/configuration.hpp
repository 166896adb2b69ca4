#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "otplan/geometry.hpp"

namespace otplan {

/// Positions of the N robots; robot i is entry i.
class Configuration {
 public:
  Configuration() = default;

  /// Throws std::invalid_argument if empty or any coordinate is non-finite.
  explicit Configuration(std::vector<Vec2> positions) : positions_(std::move(positions)) {
    if (positions_.empty()) throw std::invalid_argument("configuration needs at least one robot");
    for (const auto& p : positions_)
      if (!is_finite(p)) throw std::invalid_argument("configuration has a non-finite coordinate");
  }

  std::size_t size() const { return positions_.size(); }
  const Vec2& operator[](std::size_t i) const { return positions_[i]; }
  Vec2& operator[](std::size_t i) { return positions_[i]; }
  std::span<const Vec2> positions() const { return positions_; }
  auto begin() const { return positions_.begin(); }
  auto end() const { return positions_.end(); }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Vec2> positions_;
};

/// Intermediate destinations, one per robot.
struct TargetSet {
  std::vector<Vec2> targets;
};

/// Ordered index pairs (i, j), i != j, closer than some radius. Both
/// orientations of every pair are present and the list is sorted.
struct PairList {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  friend bool operator==(const PairList&, const PairList&) = default;
};

}  // namespace otplan
