#pragma once

/**
 * @file planar_chain.hpp
 * @brief Open planar kinematic chains: forward kinematics, recursive
 * Newton-Euler inverse dynamics, joint-space mass matrix, forward dynamics.
 *
 * All quantities live in the sagittal (x, y) plane with gravity acting along
 * -y. Link i rotates about its proximal joint; its absolute angle is
 *
 *     phi_i = phi_{i-1} + q_i + offset_i,   phi_{-1} = 0,
 *
 * so a chain with all offsets zero and q = 0 lies along +x.
 */

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "stsexo/errors.hpp"
#include "stsexo/geometry.hpp"

namespace stsexo {

inline constexpr double kStandardGravity = 9.81;

/// Rigid link of a planar chain.
struct LinkParams {
  double length = 0.0;      ///< proximal to distal joint (m)
  double mass = 0.0;        ///< kg
  double com_offset = 0.0;  ///< distance of the COM from the proximal joint along the link (m)
  double inertia = 0.0;     ///< about the COM, normal to the plane (kg m^2)
};

template <int N>
struct PlanarChain {
  static_assert(N > 0);
  static constexpr int dof = N;
  using Vector = Eigen::Matrix<double, N, 1>;
  using Matrix = Eigen::Matrix<double, N, N>;

  std::array<LinkParams, N> links{};
  std::array<double, N> joint_offsets{};
  Vec2 base = Vec2::Zero();

  [[nodiscard]] double total_mass() const noexcept {
    double m = 0.0;
    for (const auto& l : links) m += l.mass;
    return m;
  }
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string("non-finite ") + what);
}

}  // namespace detail

template <int N>
[[nodiscard]] std::array<double, N> absolute_angles(const PlanarChain<N>& chain,
                                                    const typename PlanarChain<N>::Vector& q) {
  std::array<double, N> phi{};
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    acc += q[i] + chain.joint_offsets[i];
    phi[i] = acc;
  }
  return phi;
}

/// Joint origins; element N is the distal tip of the last link.
template <int N>
[[nodiscard]] std::array<Vec2, N + 1> joint_positions(const PlanarChain<N>& chain,
                                                      const typename PlanarChain<N>::Vector& q) {
  const auto phi = absolute_angles(chain, q);
  std::array<Vec2, N + 1> p;
  p[0] = chain.base;
  for (int i = 0; i < N; ++i) p[i + 1] = p[i] + chain.links[i].length * unit_dir(phi[i]);
  return p;
}

template <int N>
[[nodiscard]] std::array<Vec2, N> com_positions(const PlanarChain<N>& chain,
                                                const typename PlanarChain<N>::Vector& q) {
  const auto phi = absolute_angles(chain, q);
  const auto joints = joint_positions(chain, q);
  std::array<Vec2, N> c;
  for (int i = 0; i < N; ++i) c[i] = joints[i] + chain.links[i].com_offset * unit_dir(phi[i]);
  return c;
}

/// Recursive Newton-Euler: tau = M(q) qdd + C(q, qd) qd + g(q).
/// `gravity` is the magnitude of the downward acceleration.
template <int N>
[[nodiscard]] typename PlanarChain<N>::Vector inverse_dynamics(
    const PlanarChain<N>& chain, const typename PlanarChain<N>::Vector& q,
    const typename PlanarChain<N>::Vector& qd, const typename PlanarChain<N>::Vector& qdd,
    double gravity) {
  detail::require_finite(q, "joint position");
  detail::require_finite(qd, "joint velocity");
  detail::require_finite(qdd, "joint acceleration");
  if (!std::isfinite(gravity)) throw NumericError("non-finite gravity");

  std::array<Vec2, N> e, a_com;
  std::array<double, N> alpha{};
  double phi = 0.0, omega = 0.0, alpha_acc = 0.0;
  // Gravity enters as an upward acceleration of the base.
  Vec2 a_joint(0.0, gravity);
  for (int i = 0; i < N; ++i) {
    phi += q[i] + chain.joint_offsets[i];
    omega += qd[i];
    alpha_acc += qdd[i];
    alpha[i] = alpha_acc;
    e[i] = unit_dir(phi);
    const Vec2 n(-e[i].y(), e[i].x());
    const auto& L = chain.links[i];
    a_com[i] = a_joint + alpha_acc * L.com_offset * n - omega * omega * L.com_offset * e[i];
    a_joint += alpha_acc * L.length * n - omega * omega * L.length * e[i];
  }

  typename PlanarChain<N>::Vector tau;
  Vec2 f_next = Vec2::Zero();
  double n_next = 0.0;
  for (int i = N - 1; i >= 0; --i) {
    const auto& L = chain.links[i];
    const Vec2 f_inertial = L.mass * a_com[i];
    const double moment = L.inertia * alpha[i] + cross(L.com_offset * e[i], f_inertial) +
                          cross(L.length * e[i], f_next) + n_next;
    tau[i] = moment;
    f_next = f_inertial + f_next;
    n_next = moment;
  }
  return tau;
}

/// Joint-space inertia matrix; column j is the inverse dynamics response to
/// qdd = e_j at rest without gravity.
template <int N>
[[nodiscard]] typename PlanarChain<N>::Matrix mass_matrix(const PlanarChain<N>& chain,
                                                          const typename PlanarChain<N>::Vector& q) {
  using Vector = typename PlanarChain<N>::Vector;
  typename PlanarChain<N>::Matrix M;
  const Vector zero = Vector::Zero();
  for (int j = 0; j < N; ++j) {
    M.col(j) = inverse_dynamics(chain, q, zero, Vector::Unit(j), 0.0);
  }
  // Remove round-off asymmetry.
  return 0.5 * (M + M.transpose());
}

/// Coriolis, centrifugal and gravity terms.
template <int N>
[[nodiscard]] typename PlanarChain<N>::Vector bias_forces(const PlanarChain<N>& chain,
                                                          const typename PlanarChain<N>::Vector& q,
                                                          const typename PlanarChain<N>::Vector& qd,
                                                          double gravity) {
  return inverse_dynamics(chain, q, qd, PlanarChain<N>::Vector::Zero(), gravity);
}

template <int N>
[[nodiscard]] typename PlanarChain<N>::Vector gravity_torques(const PlanarChain<N>& chain,
                                                              const typename PlanarChain<N>::Vector& q,
                                                              double gravity) {
  using Vector = typename PlanarChain<N>::Vector;
  return inverse_dynamics(chain, q, Vector::Zero(), Vector::Zero(), gravity);
}

/// qdd = M(q)^-1 (tau - bias(q, qd)).
template <int N>
[[nodiscard]] typename PlanarChain<N>::Vector forward_dynamics(
    const PlanarChain<N>& chain, const typename PlanarChain<N>::Vector& q,
    const typename PlanarChain<N>::Vector& qd, const typename PlanarChain<N>::Vector& tau,
    double gravity) {
  detail::require_finite(tau, "joint torque");
  const auto M = mass_matrix(chain, q);
  const double scale = M.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw SingularityError("mass matrix is zero");
  Eigen::LLT<typename PlanarChain<N>::Matrix> llt(M);
  if (llt.info() != Eigen::Success) throw SingularityError("mass matrix is not positive definite");
  // LLT succeeds on some numerically singular matrices; check the pivots.
  const typename PlanarChain<N>::Vector diag = llt.matrixLLT().diagonal();
  if (diag.minCoeff() <= 1e-12 * std::sqrt(scale)) throw SingularityError("mass matrix is singular");
  return llt.solve(tau - bias_forces(chain, q, qd, gravity));
}

template <int N>
[[nodiscard]] double potential_energy(const PlanarChain<N>& chain,
                                      const typename PlanarChain<N>::Vector& q, double gravity) {
  const auto c = com_positions(chain, q);
  double v = 0.0;
  for (int i = 0; i < N; ++i) v += chain.links[i].mass * gravity * c[i].y();
  return v;
}

template <int N>
[[nodiscard]] double kinetic_energy(const PlanarChain<N>& chain,
                                    const typename PlanarChain<N>::Vector& q,
                                    const typename PlanarChain<N>::Vector& qd) {
  return 0.5 * qd.dot(mass_matrix(chain, q) * qd);
}

/// Mass-weighted mean of the link COM positions.
template <int N>
[[nodiscard]] Vec2 center_of_mass(const PlanarChain<N>& chain,
                                  const typename PlanarChain<N>::Vector& q) {
  const double total = chain.total_mass();
  if (!(total > 0.0)) throw SingularityError("center of mass of a massless chain");
  const auto c = com_positions(chain, q);
  Vec2 acc = Vec2::Zero();
  for (int i = 0; i < N; ++i) acc += (chain.links[i].mass / total) * c[i];
  return acc;
}

template <int N>
struct ChainState {
  typename PlanarChain<N>::Vector q = PlanarChain<N>::Vector::Zero();
  typename PlanarChain<N>::Vector qd = PlanarChain<N>::Vector::Zero();
};

/// One classical Runge-Kutta step with torque held constant over the step.
template <int N>
[[nodiscard]] ChainState<N> rk4_step(const PlanarChain<N>& chain, const ChainState<N>& s,
                                     const typename PlanarChain<N>::Vector& tau, double gravity,
                                     double dt) {
  auto accel = [&](const auto& q, const auto& qd) {
    return forward_dynamics(chain, q, qd, tau, gravity);
  };
  const auto k1q = s.qd;
  const auto k1v = accel(s.q, s.qd);
  const auto k2q = (s.qd + 0.5 * dt * k1v).eval();
  const auto k2v = accel((s.q + 0.5 * dt * k1q).eval(), k2q);
  const auto k3q = (s.qd + 0.5 * dt * k2v).eval();
  const auto k3v = accel((s.q + 0.5 * dt * k2q).eval(), k3q);
  const auto k4q = (s.qd + dt * k3v).eval();
  const auto k4v = accel((s.q + dt * k3q).eval(), k4q);
  ChainState<N> out;
  out.q = s.q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  out.qd = s.qd + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

}  // namespace stsexo
