#pragma once

/**
 * @file hypervolume.hpp
 * @brief Exact hypervolume of a minimisation front in two and three
 * dimensions.
 */

#include <algorithm>
#include <vector>

#include "stsexo/errors.hpp"

namespace stsexo {

namespace detail {

/// Points strictly better than the reference in every coordinate.
inline std::vector<std::vector<double>> inside_reference(const std::vector<std::vector<double>>& pts,
                                                         const std::vector<double>& ref) {
  std::vector<std::vector<double>> out;
  for (const auto& p : pts) {
    if (p.size() != ref.size()) throw RangeError("point dimension does not match the reference");
    bool in = true;
    for (std::size_t i = 0; i < p.size(); ++i) in = in && p[i] < ref[i];
    if (in) out.push_back(p);
  }
  return out;
}

/// Area dominated by (x, y) points w.r.t. (rx, ry).
inline double hv2(std::vector<std::pair<double, double>> pts, double rx, double ry) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0, best_y = ry;
  for (const auto& [x, y] : pts) {
    if (y < best_y) {
      area += (rx - x) * (best_y - y);
      best_y = y;
    }
  }
  return area;
}

}  // namespace detail

/// Hypervolume of `points` dominated w.r.t. `ref`; 2 or 3 objectives.
/// Dominated points and points outside the reference box contribute nothing.
[[nodiscard]] inline double hypervolume(const std::vector<std::vector<double>>& points,
                                        const std::vector<double>& ref) {
  if (ref.size() != 2 && ref.size() != 3) throw RangeError("hypervolume supports 2 or 3 objectives");
  auto pts = detail::inside_reference(points, ref);
  if (pts.empty()) return 0.0;
  if (ref.size() == 2) {
    std::vector<std::pair<double, double>> p2;
    for (const auto& p : pts) p2.emplace_back(p[0], p[1]);
    return detail::hv2(std::move(p2), ref[0], ref[1]);
  }
  // Slice along the third objective: between consecutive z levels the
  // dominated cross-section is the 2D hypervolume of all points at or below.
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[2] < b[2]; });
  double vol = 0.0;
  std::vector<std::pair<double, double>> active;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    active.emplace_back(pts[i][0], pts[i][1]);
    const double z_next = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
    if (z_next > pts[i][2]) vol += detail::hv2(active, ref[0], ref[1]) * (z_next - pts[i][2]);
  }
  return vol;
}

}  // namespace stsexo
