#pragma once

// Reference formulas written out by hand, independent of the chain
// recursions they are used to check.

#include <array>
#include <cmath>

#include "stsexo/anthro.hpp"

namespace stsexo::oracle {

struct TwoLink {
  double m1, m2, l1, c1, c2, I1, I2;
};

/// Textbook double-pendulum inverse dynamics, absolute angles q1 and q1 + q2
/// measured from +x, gravity g along -y.
inline std::array<double, 2> double_pendulum_torque(const TwoLink& p, const std::array<double, 2>& q,
                                                    const std::array<double, 2>& qd,
                                                    const std::array<double, 2>& qdd, double g) {
  const double c2 = std::cos(q[1]), s2 = std::sin(q[1]);
  const double M11 = p.I1 + p.I2 + p.m1 * p.c1 * p.c1 + p.m2 * (p.l1 * p.l1 + p.c2 * p.c2 + 2.0 * p.l1 * p.c2 * c2);
  const double M12 = p.I2 + p.m2 * (p.c2 * p.c2 + p.l1 * p.c2 * c2);
  const double M22 = p.I2 + p.m2 * p.c2 * p.c2;
  const double h = p.m2 * p.l1 * p.c2 * s2;
  const double G1 = (p.m1 * p.c1 + p.m2 * p.l1) * g * std::cos(q[0]) + p.m2 * p.c2 * g * std::cos(q[0] + q[1]);
  const double G2 = p.m2 * p.c2 * g * std::cos(q[0] + q[1]);
  return {M11 * qdd[0] + M12 * qdd[1] - h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]) + G1,
          M12 * qdd[0] + M22 * qdd[1] + h * qd[0] * qd[0] + G2};
}

/// Segment COM positions by accumulating angles and joint positions with
/// plain trigonometry, then averaged with the segment masses.
template <class Chain, class Q>
Vec2 direct_com_average(const Chain& chain, const Q& q) {
  double angle = 0.0, x = chain.base.x(), y = chain.base.y(), mx = 0.0, my = 0.0, m = 0.0;
  for (std::size_t i = 0; i < chain.links.size(); ++i) {
    angle += q[static_cast<int>(i)] + chain.joint_offsets[i];
    const auto& L = chain.links[i];
    mx += L.mass * (x + L.com_offset * std::cos(angle));
    my += L.mass * (y + L.com_offset * std::sin(angle));
    m += L.mass;
    x += L.length * std::cos(angle);
    y += L.length * std::sin(angle);
  }
  return {mx / m, my / m};
}

}  // namespace stsexo::oracle
