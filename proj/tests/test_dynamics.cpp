#include <gtest/gtest.h>

#include <random>

#include "oracles/closed_form.hpp"
#include "support.hpp"

using namespace stsexo;

namespace {

const oracle::TwoLink kUnit{1.0, 1.0, 1.0, 0.5, 0.5, 1.0 / 12.0, 1.0 / 12.0};

JointVector random_posture(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  JointVector q;
  for (int i = 0; i < q.size(); ++i) q[i] = u(rng);
  return q;
}

}  // namespace

TEST(Dynamics, StaticUnloadedModelNeedsNoTorque) {
  const auto body = build_body_model({70.0, 1.75, 2, "u"});
  std::mt19937_64 rng(1);
  JointState s;
  s.q = random_posture(rng);
  EXPECT_LT(inverse_dynamics(body, s, 0.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dynamics, CantileverTorqueIsWeightTimesArm) {
  HumanChain c;
  c.links[0] = {0.8, 3.0, 0.6, 0.0};
  for (int i = 1; i < 7; ++i) c.links[i] = {0.3, 0.0, 0.1, 0.0};
  const JointVector zero = JointVector::Zero();
  const auto tau = inverse_dynamics(c, zero, zero, zero, kStandardGravity);
  EXPECT_NEAR(tau[0], 3.0 * kStandardGravity * 0.6, 1e-12);
  EXPECT_NEAR(tau.tail<6>().cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Dynamics, TwoLinkTorqueMatchesLagrangianGolden) {
  const auto& g = test::goldens()["double_pendulum"];
  const auto chain = test::unit_two_link();
  Eigen::Vector2d q(deg2rad(30.0), deg2rad(45.0)), qd(1.0, -1.0);
  const auto tau = inverse_dynamics(chain, q, qd, Eigen::Vector2d::Zero(), g["gravity"].get<double>());
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(tau[i], g["torque"][i].get<double>(), 1e-12);
}

TEST(Dynamics, TwoLinkMassMatrixMatchesLagrangianGolden) {
  const auto& g = test::goldens()["double_pendulum"];
  const auto M = mass_matrix(test::unit_two_link(), Eigen::Vector2d(0.0, kPi / 2));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(M(r, c), g["mass_matrix"][r][c].get<double>(), 1e-12);
}

TEST(Dynamics, TwoLinkAgreesWithClosedFormOnRandomStates) {
  const auto chain = test::unit_two_link();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int n = 0; n < 100; ++n) {
    Eigen::Vector2d q(u(rng), u(rng)), qd(u(rng), u(rng)), qdd(u(rng), u(rng));
    const auto tau = inverse_dynamics(chain, q, qd, qdd, kStandardGravity);
    const auto ref = oracle::double_pendulum_torque(kUnit, {q[0], q[1]}, {qd[0], qd[1]}, {qdd[0], qdd[1]},
                                                    kStandardGravity);
    for (int i = 0; i < 2; ++i) EXPECT_LT(test::rel_err(tau[i], ref[i]), 1e-12);
  }
}

TEST(Dynamics, MassMatrixIsSymmetricAndZeroForMasslessModel) {
  const auto body = build_body_model({80.0, 1.80, 2, "u"});
  std::mt19937_64 rng(3);
  for (int n = 0; n < 100; ++n) {
    const auto M = mass_matrix(body, random_posture(rng));
    EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
  HumanChain empty;
  for (auto& l : empty.links) l = {0.3, 0.0, 0.1, 0.0};
  EXPECT_EQ(mass_matrix(empty, JointVector::Zero()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dynamics, GravityTorquesAreThePotentialGradient) {
  const auto body = build_body_model({75.0, 1.72, 2, "u"});
  const auto chain = body.chain();
  std::mt19937_64 rng(11);
  for (int n = 0; n < 20; ++n) {
    const JointVector q = random_posture(rng);
    const auto tau = gravity_torques(chain, q, kStandardGravity);
    for (int j = 0; j < 7; ++j) {
      constexpr double h = 1e-6;
      JointVector qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const double dV = (potential_energy(chain, qp, kStandardGravity) - potential_energy(chain, qm, kStandardGravity)) / (2 * h);
      EXPECT_NEAR(tau[j], dV, 1e-6 * std::max(1.0, std::abs(dV)));
    }
  }
}

TEST(Dynamics, BiasForcesEqualZeroAccelerationInverseDynamics) {
  const auto body = build_body_model({60.0, 1.65, 2, "u"});
  std::mt19937_64 rng(5);
  const JointVector q = random_posture(rng), qd = random_posture(rng);
  JointState s{q, qd, JointVector::Zero()};
  EXPECT_LT((bias_forces(body, q, qd) - inverse_dynamics(body, s)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(bias_forces(body, q, JointVector::Zero(), 0.0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dynamics, ForwardDynamicsInvertsInverseDynamics) {
  const auto body = build_body_model({90.0, 1.85, 3, "u"});
  std::mt19937_64 rng(9);
  for (int n = 0; n < 100; ++n) {
    const JointVector q = random_posture(rng), qd = random_posture(rng), qdd = random_posture(rng);
    const auto tau = inverse_dynamics(body, JointState{q, qd, qdd});
    const auto back = forward_dynamics(body, q, qd, tau);
    EXPECT_LT((back - qdd).norm() / std::max(1.0, qdd.norm()), 1e-8);
    const auto still = forward_dynamics(body, q, qd, bias_forces(body, q, qd));
    EXPECT_LT(still.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Dynamics, ForwardDynamicsRejectsSingularAndNonFiniteInput) {
  PlanarChain<2> c;
  EXPECT_THROW((void)forward_dynamics(c, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 9.81),
               SingularityError);
  const auto u = test::unit_two_link();
  EXPECT_THROW((void)inverse_dynamics(u, Eigen::Vector2d(NAN, 0.0), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 9.81),
               NumericError);
}

TEST(Dynamics, UnforcedDropConservesEnergy) {
  const auto chain = test::unit_two_link();
  ChainState<2> s;
  s.q = Eigen::Vector2d(deg2rad(10.0), deg2rad(20.0));
  auto energy = [&](const ChainState<2>& x) {
    return kinetic_energy(chain, x.q, x.qd) + potential_energy(chain, x.q, kStandardGravity);
  };
  const double e0 = energy(s);
  for (int i = 0; i < 10000; ++i) s = rk4_step(chain, s, Eigen::Vector2d::Zero(), kStandardGravity, 1e-4);
  EXPECT_LT(std::abs(energy(s) - e0) / std::abs(e0), 1e-6);
}

TEST(Dynamics, WholeBodyComSingleAndPointMassCases) {
  PlanarChain<2> c;
  c.links[0] = {2.0, 1.0, 1.0, 0.0};
  c.links[1] = {2.0, 1.0, 1.0, 0.0};
  const Eigen::Vector2d q(kPi / 2, 0.0);
  EXPECT_LT((sesc_com(c, q) - Vec2(0.0, 2.0)).norm(), 1e-12);
  c.links[1].mass = 0.0;
  EXPECT_LT((sesc_com(c, q) - Vec2(0.0, 1.0)).norm(), 1e-12);
}

TEST(Dynamics, WholeBodyComMatchesDirectAverage) {
  const auto body = build_body_model({70.0, 1.75, 2, "u"});
  std::mt19937_64 rng(13);
  for (int n = 0; n < 1000; ++n) {
    const JointVector q = random_posture(rng);
    EXPECT_LT((sesc_com(body, q) - oracle::direct_com_average(body.chain(), q)).cwiseAbs().maxCoeff(), 1e-12);
  }
}
