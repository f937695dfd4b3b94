#pragma once

// Human body dynamics: thin wrappers binding BodyModel to the planar chain
// algorithms, plus the serial-chain whole-body COM.

#include <Eigen/Core>

#include "stsexo/anthro.hpp"
#include "stsexo/planar_chain.hpp"

namespace stsexo {

struct JointState {
  JointVector q = JointVector::Zero();
  JointVector qd = JointVector::Zero();
  JointVector qdd = JointVector::Zero();
};

using TorqueVector = JointVector;
using ComPoint = Vec2;
using MassMatrix = HumanChain::Matrix;

[[nodiscard]] inline TorqueVector inverse_dynamics(const BodyModel& model, const JointState& s,
                                                   double gravity = kStandardGravity) {
  return inverse_dynamics(model.chain(), s.q, s.qd, s.qdd, gravity);
}

[[nodiscard]] inline MassMatrix mass_matrix(const BodyModel& model, const JointVector& q) {
  return mass_matrix(model.chain(), q);
}

[[nodiscard]] inline TorqueVector bias_forces(const BodyModel& model, const JointVector& q,
                                              const JointVector& qd, double gravity = kStandardGravity) {
  return bias_forces(model.chain(), q, qd, gravity);
}

[[nodiscard]] inline JointVector forward_dynamics(const BodyModel& model, const JointVector& q,
                                                  const JointVector& qd, const TorqueVector& tau,
                                                  double gravity = kStandardGravity) {
  return forward_dynamics(model.chain(), q, qd, tau, gravity);
}

/// Homogeneous transform of link frame i relative to link frame i-1.
[[nodiscard]] inline Eigen::Matrix3d link_transform(double angle, double parent_length) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  const double c = std::cos(angle), s = std::sin(angle);
  A(0, 0) = c;
  A(0, 1) = -s;
  A(1, 0) = s;
  A(1, 1) = c;
  A(0, 2) = parent_length;
  return A;
}

/// Whole-body COM as a statistically equivalent serial chain:
/// C = sum_i (m_i / M) A_0^i [c_i; 1], with c_i the COM in link frame i.
template <int N>
[[nodiscard]] ComPoint sesc_com(const PlanarChain<N>& chain, const typename PlanarChain<N>::Vector& q) {
  const double total = chain.total_mass();
  if (!(total > 0.0)) throw SingularityError("whole-body COM of a massless model");
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  A(0, 2) = chain.base.x();
  A(1, 2) = chain.base.y();
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  double parent_length = 0.0;
  for (int i = 0; i < N; ++i) {
    A = A * link_transform(q[i] + chain.joint_offsets[i], parent_length);
    const auto& L = chain.links[i];
    acc += (L.mass / total) * (A * Eigen::Vector3d(L.com_offset, 0.0, 1.0));
    parent_length = L.length;
  }
  return acc.head<2>();
}

[[nodiscard]] inline ComPoint sesc_com(const BodyModel& model, const JointVector& q) {
  return sesc_com(model.chain(), q);
}

}  // namespace stsexo
