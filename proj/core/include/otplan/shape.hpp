#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "otplan/geometry.hpp"

namespace otplan {

struct NearestPoint {
  Vec2 point;
  double sq_dist = 0.0;
  std::size_t index = 0;
};

/// Target point set with a uniform-grid nearest-point index.
///
/// Immutable after construction; all queries are const and safe to call
/// concurrently. Nearest-point ties resolve to the lowest point index, so
/// the distance field and its gradient are deterministic everywhere,
/// including on the medial axis where mu is not differentiable.
class Shape {
 public:
  /// Throws std::invalid_argument for an empty set or non-finite coordinates.
  explicit Shape(std::vector<Vec2> points, std::string name = "shape");

  std::span<const Vec2> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Box2& bounding_box() const { return box_; }
  const std::string& name() const { return name_; }
  double cell_size() const { return cell_; }

  NearestPoint nearest_point(const Vec2& x) const;

  /// Squared distance to the nearest shape point.
  double mu(const Vec2& x) const { return nearest_point(x).sq_dist; }

  /// 2(x - p*) with p* the tie-broken nearest point. On the medial axis this
  /// is the gradient of the selected quadratic piece, not a true gradient.
  Vec2 grad_mu(const Vec2& x) const { return 2.0 * (x - nearest_point(x).point); }

  /// Median distance from a shape point to its closest other shape point;
  /// zero for single-point shapes.
  double sampling_resolution() const { return resolution_; }

  Shape translated(const Vec2& offset) const;

 private:
  NearestPoint search(const Vec2& x, std::size_t exclude) const;
  std::size_t cell_of(double coord, double lo, std::size_t count) const;

  std::vector<Vec2> points_;
  std::string name_;
  Box2 box_;
  double cell_ = 1.0;
  std::size_t nx_ = 1;
  std::size_t ny_ = 1;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> cell_items_;
  double resolution_ = 0.0;
};

/// Exhaustive scan with the same tie rule as Shape::nearest_point.
NearestPoint nearest_point_exhaustive(std::span<const Vec2> points, const Vec2& x);

// Text point files: one "x y" or "x,y" pair per line, '#' starts a comment line.
Shape parse_shape_text(std::string_view text, std::string name = "shape");
Shape load_shape_file(const std::filesystem::path& path);
std::string format_shape_text(const Shape& shape);

/// Binary PGM ("P5"). Pixels darker than `threshold` become points at their
/// centers, scaled uniformly (aspect preserved, centered) into [-M, M]^2.
Shape parse_pgm_shape(std::string_view bytes, int threshold, double domain_M,
                      std::string name = "bitmap");
Shape load_pgm_shape(const std::filesystem::path& path, int threshold, double domain_M);

namespace shapes {

/// `count` points evenly spaced on a circle, starting at angle zero.
std::vector<Vec2> circle(Vec2 center, double radius, std::size_t count);

/// Points along a polyline with spacing at most `spacing`; vertices included.
std::vector<Vec2> segment_chain(std::span<const Vec2> vertices, double spacing, bool closed);

/// Lattice points (multiples of `spacing`) inside a simple polygon, even-odd rule.
std::vector<Vec2> polygon_fill(std::span<const Vec2> vertices, double spacing);

/// Lattice points within `half_width` of any of the given polylines.
std::vector<Vec2> thick_stroke(std::span<const std::vector<Vec2>> polylines, double half_width,
                               double spacing);

/// Parameters of the reconstructed handwritten-'Q' glyph: a thick closed
/// ring plus a diagonal tail crossing its lower right side.
struct QGlyph {
  Vec2 center{0.0, 0.3};
  double ring_radius = 3.8;
  double half_width = 0.5;
  double spacing = 0.1;
  double tail_length = 3.0;
};

std::vector<Vec2> q_glyph(const QGlyph& glyph);

}  // namespace shapes

}  // namespace otplan
