#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace stsexo {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

[[nodiscard]] constexpr double deg2rad(double deg) noexcept { return deg * kPi / 180.0; }
[[nodiscard]] constexpr double rad2deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// z-component of the planar cross product.
[[nodiscard]] inline double cross(const Vec2& a, const Vec2& b) noexcept {
  return a.x() * b.y() - a.y() * b.x();
}

[[nodiscard]] inline Vec2 rotate(const Vec2& p, double angle) noexcept {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

[[nodiscard]] inline Vec2 unit_dir(double angle) noexcept {
  return {std::cos(angle), std::sin(angle)};
}

/// Simple (non self-intersecting) polygon, vertices in order.
struct Polygon {
  std::vector<Vec2> vertices;

  [[nodiscard]] static Polygon rectangle(double xmin, double xmax, double ymin, double ymax) {
    return Polygon{{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}}};
  }

  [[nodiscard]] bool contains(const Vec2& p) const noexcept {
    // boundary counts as inside
    if (distance_outside(p) == 0.0) return true;
    return false;
  }

  /// Euclidean distance from p to the polygon; zero inside or on the boundary.
  [[nodiscard]] double distance_outside(const Vec2& p) const noexcept {
    const std::size_t n = vertices.size();
    if (n == 0) return 0.0;
    bool inside = false;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2& a = vertices[i];
      const Vec2& b = vertices[j];
      if (((a.y() > p.y()) != (b.y() > p.y())) &&
          (p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())) {
        inside = !inside;
      }
      const Vec2 ab = b - a;
      const double len2 = ab.squaredNorm();
      double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, (a + t * ab - p).norm());
    }
    return inside ? 0.0 : best;
  }

  [[nodiscard]] Vec2 centroid() const noexcept {
    // area-weighted centroid (shoelace)
    double a2 = 0.0;
    Vec2 c = Vec2::Zero();
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const double w = cross(vertices[j], vertices[i]);
      a2 += w;
      c += (vertices[j] + vertices[i]) * w;
    }
    if (a2 == 0.0) {
      Vec2 m = Vec2::Zero();
      for (const auto& v : vertices) m += v;
      return n ? Vec2(m / static_cast<double>(n)) : m;
    }
    return c / (3.0 * a2);
  }

  /// Axis-aligned bounding box as (min, max).
  [[nodiscard]] std::pair<Vec2, Vec2> bounds() const noexcept {
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
    Vec2 hi = -lo;
    for (const auto& v : vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    return {lo, hi};
  }
};

}  // namespace stsexo
