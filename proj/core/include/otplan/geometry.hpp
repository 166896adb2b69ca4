#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace otplan {

/// Point or displacement in the plane.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double squared_norm(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::sqrt(squared_norm(a)); }
constexpr double squared_distance(const Vec2& a, const Vec2& b) { return squared_norm(a - b); }
inline double distance(const Vec2& a, const Vec2& b) { return std::sqrt(squared_distance(a, b)); }

inline bool is_finite(const Vec2& a) { return std::isfinite(a.x) && std::isfinite(a.y); }

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Axis-aligned rectangle.
struct Box2 {
  Vec2 lo{kInfinity, kInfinity};
  Vec2 hi{-kInfinity, -kInfinity};

  void expand(const Vec2& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double diagonal() const { return std::hypot(width(), height()); }
};

/// Per-robot field over a configuration (gradients, forces).
using VectorField = std::vector<Vec2>;

/// Sum of squared per-robot norms, i.e. the squared Euclidean norm in R^{2N}.
inline double squared_norm(const VectorField& v) {
  double s = 0.0;
  for (const auto& e : v) s += squared_norm(e);
  return s;
}

}  // namespace otplan
