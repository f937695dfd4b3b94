#pragma once

/**
 * @file mechanism.hpp
 * @brief Direction-dependent double wire-pulley coupling between knee and hip.
 *
 * Geometry is expressed in a knee-centred frame aligned with the base link
 * (link 1, fixed to the shank). Points on the thigh link (link 2) are given
 * in its own frame, whose x axis runs from the knee to the hip; they are
 * mapped to the knee frame by a rotation of q2.
 *
 * Circuit P1 (standing) leaves the hip pulley (radius r1), exits the thigh
 * at w, crosses to p on the base, is routed along the base to o and crosses
 * back to its anchor v on the thigh. Circuit P2 (sitting) leaves the hip
 * pulley (radius r2) at u on the thigh and is anchored at n on the base.
 * The two circuits wrap the hip pulley in opposite senses:
 *
 *   L1 = |p - w| + |v - o| + r1 q3,     L2 = |n - u| - r2 q3
 *
 * (constant terms along each link dropped). A taut circuit holds its length,
 * which defines the hip angle as a function of the knee angle.
 */

#include <array>
#include <cmath>
#include <string>

#include "stsexo/anthro.hpp"
#include "stsexo/errors.hpp"
#include "stsexo/geometry.hpp"

namespace stsexo {

struct DesignVector {
  Vec2 u = Vec2::Zero();  ///< thigh frame, P2 exit
  Vec2 v = Vec2::Zero();  ///< thigh frame, P1 anchor
  Vec2 w = Vec2::Zero();  ///< thigh frame, P1 exit
  Vec2 n = Vec2::Zero();  ///< base frame, P2 anchor
  Vec2 o = Vec2::Zero();  ///< base frame, P1 routing exit
  Vec2 p = Vec2::Zero();  ///< base frame, P1 routing entry
  double r1 = 0.03;
  double r2 = 0.03;
  double eta = 0.9;

  static constexpr int kSize = 15;
  using Array = std::array<double, kSize>;

  [[nodiscard]] Array to_array() const {
    return {u.x(), u.y(), v.x(), v.y(), w.x(), w.y(), n.x(), n.y(),
            o.x(), o.y(), p.x(), p.y(), r1,    r2,    eta};
  }

  [[nodiscard]] static DesignVector from_array(const Array& x) {
    DesignVector d;
    d.u = {x[0], x[1]};
    d.v = {x[2], x[3]};
    d.w = {x[4], x[5]};
    d.n = {x[6], x[7]};
    d.o = {x[8], x[9]};
    d.p = {x[10], x[11]};
    d.r1 = x[12];
    d.r2 = x[13];
    d.eta = x[14];
    return d;
  }

  static constexpr std::array<const char*, kSize> kNames = {
      "u_x", "u_y", "v_x", "v_y", "w_x", "w_y", "n_x", "n_y",
      "o_x", "o_y", "p_x", "p_y", "r1",  "r2",  "eta"};
};

/// Admissible regions for the anchors and ranges for the scalar variables.
struct DesignBounds {
  Polygon thigh_area = Polygon::rectangle(0.04, 0.36, -0.06, 0.06);   ///< A2, thigh frame
  Polygon base_area = Polygon::rectangle(-0.10, 0.10, -0.40, -0.04);  ///< A1, base frame
  double r_min = 0.01;
  double r_max = 0.08;
  double eta_min = 0.7;
  double eta_max = 0.98;

  /// Box enclosing every admissible design, in DesignVector::to_array order.
  [[nodiscard]] std::pair<DesignVector::Array, DesignVector::Array> box() const {
    const auto [tlo, thi] = thigh_area.bounds();
    const auto [blo, bhi] = base_area.bounds();
    DesignVector::Array lo{}, hi{};
    for (int k = 0; k < 3; ++k) {
      lo[2 * k] = tlo.x(), lo[2 * k + 1] = tlo.y();
      hi[2 * k] = thi.x(), hi[2 * k + 1] = thi.y();
      lo[6 + 2 * k] = blo.x(), lo[6 + 2 * k + 1] = blo.y();
      hi[6 + 2 * k] = bhi.x(), hi[6 + 2 * k + 1] = bhi.y();
    }
    lo[12] = lo[13] = r_min;
    hi[12] = hi[13] = r_max;
    lo[14] = eta_min;
    hi[14] = eta_max;
    return {lo, hi};
  }
};

/**
 * Transition angles (rad).
 *
 * `beta` is the backward lean from the standing hip angle, so P2 engages at
 * hip angle `q_s + beta`; the other angles are absolute hip/knee angles.
 */
struct EngagementAngles {
  double gamma = deg2rad(30.0);
  double beta = deg2rad(-30.0);
  double delta = deg2rad(-45.0);
  double q_s = deg2rad(-90.0);
  double q_o = deg2rad(0.0);
  double q_f = deg2rad(90.0);

  [[nodiscard]] double sit_engage_hip() const noexcept { return q_s + beta; }
  [[nodiscard]] double standing_span() const noexcept { return gamma - q_s; }
  [[nodiscard]] double sitting_span() const noexcept { return delta - sit_engage_hip(); }

  void validate() const {
    if (!(q_o < q_f)) throw RangeError("sitting knee angle must be below standing knee angle");
    if (!(gamma > q_s)) throw RangeError("forward engagement angle must exceed the standing hip angle");
    if (!(beta < 0.0)) throw RangeError("backward engagement lean must be negative");
    if (!(beta > delta)) throw RangeError("backward engagement lean must exceed the sitting hip angle");
    if (!(sit_engage_hip() < delta)) throw RangeError("sitting hip angle must exceed the P2 engagement angle");
  }
};

struct WireTensions {
  double T_i = 0.0;  ///< P1, segment p-w (hip side)
  double T_o = 0.0;  ///< P1, segment v-o (after the base routing)
  double T_u = 0.0;  ///< P2, segment n-u
};

struct KneeMoment {
  double Mo = 0.0;  ///< required knee actuator torque, positive extends the knee
  WireTensions tensions;
};

namespace detail {

inline void require_finite_design(const DesignVector& d) {
  for (double x : d.to_array()) {
    if (!std::isfinite(x)) throw GeometryError("non-finite design variable");
  }
  if (!(d.r1 > 0.0) || !(d.r2 > 0.0)) throw GeometryError("pulley radius must be positive");
}

/// d|R(q2) a - b| / dq2 for a on the thigh and b on the base.
[[nodiscard]] inline double distance_rate(const Vec2& a_world, const Vec2& b) {
  const Vec2 d = a_world - b;
  const double len = d.norm();
  if (len < 1e-12) throw GeometryError("coincident anchor points");
  return cross(a_world, d) / len;
}

}  // namespace detail

[[nodiscard]] inline Vec2 thigh_to_knee_frame(const Vec2& local, double q2) { return rotate(local, q2); }

/// |p - w| + |v - o| at knee angle q2.
[[nodiscard]] inline double free_length_p1(const DesignVector& d, double q2) {
  return (d.p - rotate(d.w, q2)).norm() + (rotate(d.v, q2) - d.o).norm();
}

[[nodiscard]] inline double free_length_p2(const DesignVector& d, double q2) {
  return (d.n - rotate(d.u, q2)).norm();
}

[[nodiscard]] inline double free_length_rate_p1(const DesignVector& d, double q2) {
  return detail::distance_rate(rotate(d.w, q2), d.p) + detail::distance_rate(rotate(d.v, q2), d.o);
}

[[nodiscard]] inline double free_length_rate_p2(const DesignVector& d, double q2) {
  return detail::distance_rate(rotate(d.u, q2), d.n);
}

[[nodiscard]] inline double circuit_length_p1(const DesignVector& d, double q2, double q3) {
  detail::require_finite_design(d);
  if (!std::isfinite(q2) || !std::isfinite(q3)) throw GeometryError("non-finite joint angle");
  return free_length_p1(d, q2) + d.r1 * q3;
}

[[nodiscard]] inline double circuit_length_p2(const DesignVector& d, double q2, double q3) {
  detail::require_finite_design(d);
  if (!std::isfinite(q2) || !std::isfinite(q3)) throw GeometryError("non-finite joint angle");
  return free_length_p2(d, q2) - d.r2 * q3;
}

/// Residual of the standing start-to-end synchronisation (rad): the hip
/// travel produced by P1 over [q_o, q_f] minus (gamma - q_s).
[[nodiscard]] inline double standing_sync_residual(const DesignVector& d, const EngagementAngles& a) {
  return (free_length_p1(d, a.q_f) - free_length_p1(d, a.q_o)) / d.r1 - a.standing_span();
}

/// Residual of the sitting synchronisation (rad).
[[nodiscard]] inline double sitting_sync_residual(const DesignVector& d, const EngagementAngles& a) {
  return (free_length_p2(d, a.q_o) - free_length_p2(d, a.q_f)) / d.r2 - a.sitting_span();
}

namespace detail {

inline void require_knee_range(const EngagementAngles& a, double q2) {
  constexpr double tol = 1e-9;
  if (!(q2 >= a.q_o - tol && q2 <= a.q_f + tol)) throw CouplingInfeasible("knee angle outside [q_o, q_f]");
}

inline double require_hip_range(double q3, const JointLimit& hip) {
  if (!std::isfinite(q3) || !hip.contains(q3, 1e-9)) {
    throw CouplingInfeasible("coupled hip angle outside the joint range");
  }
  return q3;
}

}  // namespace detail

/// Hip angle that keeps P1 at its engagement length (engaged at (q_o, gamma)).
[[nodiscard]] inline double coupling_map_standing(const DesignVector& d, const EngagementAngles& a,
                                                  double q2,
                                                  const JointLimit& hip = default_joint_limits()[kHip]) {
  detail::require_finite_design(d);
  detail::require_knee_range(a, q2);
  const double q3 = a.gamma - (free_length_p1(d, q2) - free_length_p1(d, a.q_o)) / d.r1;
  return detail::require_hip_range(q3, hip);
}

/// Hip angle that keeps P2 at its engagement length (engaged at (q_f, q_s + beta)).
[[nodiscard]] inline double coupling_map_sitting(const DesignVector& d, const EngagementAngles& a,
                                                 double q2,
                                                 const JointLimit& hip = default_joint_limits()[kHip]) {
  detail::require_finite_design(d);
  detail::require_knee_range(a, q2);
  const double q3 = a.sit_engage_hip() + (free_length_p2(d, q2) - free_length_p2(d, a.q_f)) / d.r2;
  return detail::require_hip_range(q3, hip);
}

/// dq3/dq2 along the standing coupling.
[[nodiscard]] inline double coupling_slope_standing(const DesignVector& d, double q2) {
  return -free_length_rate_p1(d, q2) / d.r1;
}

[[nodiscard]] inline double coupling_slope_sitting(const DesignVector& d, double q2) {
  return free_length_rate_p2(d, q2) / d.r2;
}

/**
 * Knee load with P1 engaged.
 *
 * The hip pulley balances the hip load, tau3 = -r1 T_i, so P1 can only carry
 * tau3 <= 0. Routing losses act on the transmitted segment, T_o = eta T_i.
 * Mo = tau2 - (w x T_i + v x T_o), the torque the knee actuator must supply.
 */
[[nodiscard]] inline KneeMoment knee_moment_standing(const DesignVector& d, const EngagementAngles& a,
                                                     double q2, double tau2, double tau3) {
  (void)a;
  detail::require_finite_design(d);
  if (tau3 > 1e-12) throw SlackWireError("P1 cannot carry a backward hip load");
  KneeMoment out;
  const double T = -tau3 / d.r1;
  out.tensions.T_i = T;
  out.tensions.T_o = d.eta * T;
  if (T == 0.0) {
    out.Mo = tau2;
    return out;
  }
  const Vec2 w = rotate(d.w, q2);
  const Vec2 v = rotate(d.v, q2);
  const Vec2 pw = d.p - w;
  const Vec2 ov = d.o - v;
  if (pw.norm() < 1e-12 || ov.norm() < 1e-12) throw GeometryError("coincident anchor points");
  const double moment = cross(w, out.tensions.T_i * pw.normalized()) +
                        cross(v, out.tensions.T_o * ov.normalized());
  out.Mo = tau2 - moment;
  return out;
}

/// Knee load with P2 engaged: tau3 = r2 T_u / eta, Mo = tau2 - u x T_u.
[[nodiscard]] inline KneeMoment knee_moment_sitting(const DesignVector& d, const EngagementAngles& a,
                                                    double q2, double tau2, double tau3) {
  (void)a;
  detail::require_finite_design(d);
  if (tau3 < -1e-12) throw SlackWireError("P2 cannot carry a forward hip load");
  KneeMoment out;
  out.tensions.T_u = d.eta * std::max(tau3, 0.0) / d.r2;
  if (out.tensions.T_u == 0.0) {
    out.Mo = tau2;
    return out;
  }
  const Vec2 u = rotate(d.u, q2);
  const Vec2 nu = d.n - u;
  if (nu.norm() < 1e-12) throw GeometryError("coincident anchor points");
  out.Mo = tau2 - cross(u, out.tensions.T_u * nu.normalized());
  return out;
}

/// Sum of distances by which the anchors leave their admissible areas.
[[nodiscard]] inline double area_violation(const DesignVector& d, const DesignBounds& b) {
  return b.thigh_area.distance_outside(d.u) + b.thigh_area.distance_outside(d.v) +
         b.thigh_area.distance_outside(d.w) + b.base_area.distance_outside(d.n) +
         b.base_area.distance_outside(d.o) + b.base_area.distance_outside(d.p);
}

[[nodiscard]] inline double scalar_bound_violation(const DesignVector& d, const DesignBounds& b) {
  auto outside = [](double x, double lo, double hi) { return std::max({0.0, lo - x, x - hi}); };
  return outside(d.r1, b.r_min, b.r_max) + outside(d.r2, b.r_min, b.r_max) +
         outside(d.eta, b.eta_min, b.eta_max);
}

}  // namespace stsexo
