#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace stsexo;

namespace {

NormConstants norms(double ref = 419.6938420139609, int m = 180) {
  NormConstants n;
  n.moment_ref = ref;
  n.m = m;
  return n;
}

EvalContext reference_context() {
  EvalContext ctx;
  const auto& f = test::reference_design();
  ctx.body = build_body_model(f.context);
  ctx.placement = *f.placement;
  ctx.spring = test::reference_spring();
  ctx.norms = norms();
  ctx.sim.moment_ref = ctx.norms.moment_ref;
  return ctx;
}

}  // namespace

TEST(MomentTerms, ConstantLoadsGiveClosedForms) {
  const std::vector<double> st(181, 100.0), si(181, 50.0);
  const auto t = moment_terms(st, si, norms(200.0));
  EXPECT_NEAR(t.standing, 0.5, 1e-14);
  EXPECT_NEAR(t.sitting, 4.0, 1e-14);
}

TEST(MomentTerms, NonPositiveSittingLoadIsRejected) {
  std::vector<double> st(11, 1.0), si(11, 1.0);
  si[4] = 0.0;
  EXPECT_THROW((void)moment_terms(st, si, norms(1.0, 10)), DivisionGuard);
  EXPECT_THROW((void)moment_terms(st, std::vector<double>(5, 1.0), norms(1.0, 10)), RangeError);
}

TEST(MomentTerms, TrapezoidSumsMatchTheFrozenSweep) {
  const auto& g = test::goldens()["objective_trapezoid"];
  const auto table = csv::read_file((test::source_dir() / "tests" / "golden" / "sweep_u70_reference.csv").string());
  std::vector<double> st, si;
  for (const auto& row : table.rows) {
    (row[table.column("direction")] == "sit_to_stand" ? st : si).push_back(csv::to_double(row[table.column("Mo")], 0));
  }
  const auto t = moment_terms(st, si, norms(g["moment_ref"].get<double>(), g["m"].get<int>()));
  EXPECT_NEAR(t.standing, g["standing"].get<double>(), 1e-12);
  EXPECT_NEAR(t.sitting, g["sitting"].get<double>(), 1e-12);
}

TEST(MotionTerms, ReferenceDesignIsNearlyLinear) {
  const auto t = motion_terms(test::reference_design().design, EngagementAngles{}, norms());
  EXPECT_GE(t.standing, 0.0);
  EXPECT_GE(t.sitting, 0.0);
  EXPECT_LT(t.total(), 0.2);
}

TEST(TorqueTerm, MomentOnTheLineGivesZero) {
  const auto pl = *test::reference_design().placement;
  const auto& s = test::reference_spring();
  const EngagementAngles a;
  const int m = 20;
  const double t_o = ideal_actuator_torque(pl, s, a.q_o), t_f = ideal_actuator_torque(pl, s, a.q_f);
  std::vector<SweepPoint> sw(m + 1);
  for (int k = 0; k <= m; ++k) {
    sw[k].q2 = sweep_angle(a, m, k, Direction::SitToStand);
    sw[k].knee.Mo = t_o + (t_f - t_o) * (sw[k].q2 - a.q_o) / (a.q_f - a.q_o);
  }
  EXPECT_NEAR(torque_term(sw, pl, s, a, norms(100.0, m)), 0.0, 1e-12);
  for (auto& p : sw) p.knee.Mo += 10.0;
  EXPECT_NEAR(torque_term(sw, pl, s, a, norms(100.0, m)), 0.1, 1e-12);
}

TEST(Violation, AreaExitIsCountedOnce) {
  const DesignBounds b;
  DesignVector d = test::reference_design().design;
  const double base = static_violation(d, EngagementAngles{}, b);
  d.o = Vec2(0.0, -0.40 - 0.02);
  const double moved = static_violation(d, EngagementAngles{}, b);
  EXPECT_NEAR(area_violation(d, b), 0.02, 1e-12);
  EXPECT_GT(moved, base);
}

TEST(Candidate, ReferenceDesignIsFeasibleWithFiniteObjectives) {
  const auto ctx = reference_context();
  const auto c = evaluate_candidate(test::reference_design().design, ctx);
  EXPECT_TRUE(c.feasible) << c.failure;
  EXPECT_LE(c.constraint_violation, ctx.tolerance);
  for (double f : c.objectives.to_vector()) {
    EXPECT_TRUE(std::isfinite(f));
    EXPECT_LT(f, kWorstObjective);
  }
}

TEST(Candidate, BrokenGeometryIsInfeasibleNotFatal) {
  const auto ctx = reference_context();
  DesignVector d = test::reference_design().design;
  d.r1 = 0.0;
  const auto c = evaluate_candidate(d, ctx);
  EXPECT_FALSE(c.feasible);
  EXPECT_GT(c.constraint_violation, ctx.tolerance);
  EXPECT_EQ(c.objectives.j_moment, kWorstObjective);
}

TEST(Candidate, RandomDesignsAreRankedConsistently) {
  auto ctx = reference_context();
  ctx.norms.m = 36;
  ctx.sim.dq = (ctx.angles.q_f - ctx.angles.q_o) / 36;
  const auto [lo, hi] = ctx.bounds.box();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 300; ++n) {
    DesignVector::Array x{};
    for (int k = 0; k < DesignVector::kSize; ++k) x[k] = lo[k] + u(rng) * (hi[k] - lo[k]);
    const auto c = evaluate_candidate(DesignVector::from_array(x), ctx);
    EXPECT_GE(c.constraint_violation, static_violation(c.design, ctx.angles, ctx.bounds) - 1e-12);
    EXPECT_EQ(c.feasible, c.constraint_violation <= ctx.tolerance);
    if (!c.feasible) {
      EXPECT_EQ(c.objectives.j_motion, kWorstObjective);
    }
  }
}
