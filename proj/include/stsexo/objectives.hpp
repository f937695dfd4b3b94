#pragma once

/**
 * @file objectives.hpp
 * @brief Design objectives and constraint evaluation for the wire-pulley
 * mechanism.
 *
 * All sums over a sweep use trapezoid weights (1/2 at both ends), so a
 * sweep of m intervals has total weight m.
 */

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "stsexo/mechanism.hpp"
#include "stsexo/sts_sim.hpp"

namespace stsexo {

struct ObjectiveVector {
  double j_moment = 0.0;
  double j_motion = 0.0;
  double j_torque = 0.0;

  [[nodiscard]] std::vector<double> to_vector() const { return {j_moment, j_motion, j_torque}; }
};

struct NormConstants {
  double moment_ref = 1.0;  ///< N m
  int m = 180;              ///< sweep intervals
  double dq = deg2rad(0.5);

  void validate() const {
    if (!(moment_ref > 0.0)) throw RangeError("moment_ref must be positive");
    if (m < 1) throw RangeError("sample count must be positive");
  }
};

[[nodiscard]] inline NormConstants make_norms(const ExoModel& exo, const EngagementAngles& a,
                                              const SimOptions& opt = {}) {
  NormConstants n;
  n.moment_ref = reference_moment(exo, a, opt);
  n.dq = opt.dq;
  n.m = sweep_intervals(a, opt.dq);
  return n;
}

[[nodiscard]] inline double trapezoid_weight(int k, int m) noexcept { return (k == 0 || k == m) ? 0.5 : 1.0; }

/// Trapezoid-weighted sum of f(k) over k = 0..m.
template <typename F>
[[nodiscard]] double trapezoid_sum(int m, F&& f) {
  double acc = 0.0;
  for (int k = 0; k <= m; ++k) acc += trapezoid_weight(k, m) * f(k);
  return acc;
}

struct MomentTerms {
  double standing = 0.0;
  double sitting = 0.0;
  [[nodiscard]] double total() const noexcept { return standing + sitting; }
};

/// Standing term (1/(Mr m)) sum Mo over the standing sweep plus sitting
/// term (Mr/m) sum 1/Mo over the sitting sweep.
[[nodiscard]] inline MomentTerms moment_terms(const std::vector<double>& Mo_standing,
                                              const std::vector<double>& Mo_sitting,
                                              const NormConstants& n) {
  const int m = static_cast<int>(Mo_standing.size()) - 1;
  if (m < 1 || Mo_sitting.size() != Mo_standing.size()) throw RangeError("sweep sizes do not match");
  MomentTerms t;
  t.standing = trapezoid_sum(m, [&](int k) { return Mo_standing[k]; }) / (n.moment_ref * m);
  t.sitting = trapezoid_sum(m, [&](int k) {
                if (!(Mo_sitting[k] > 0.0)) throw DivisionGuard("non-positive knee moment in the sitting sweep");
                return 1.0 / Mo_sitting[k];
              }) * n.moment_ref / m;
  return t;
}

namespace detail {

inline std::vector<double> moments(const std::vector<SweepPoint>& sw) {
  std::vector<double> out;
  out.reserve(sw.size());
  for (const auto& p : sw) out.push_back(p.knee.Mo);
  return out;
}

}  // namespace detail

[[nodiscard]] inline double objective_moment_load(const DesignVector& d, const BodyModel& body,
                                                  const ExoModel& exo, const EngagementAngles& a,
                                                  const NormConstants& n, const SimOptions& opt = {}) {
  SimOptions o = opt;
  o.dq = (a.q_f - a.q_o) / n.m;
  const auto st = quasi_static_sweep(body, exo, d, nullptr, nullptr, a, Direction::SitToStand, o);
  const auto si = quasi_static_sweep(body, exo, d, nullptr, nullptr, a, Direction::StandToSit, o);
  return moment_terms(detail::moments(st), detail::moments(si), n).total();
}

struct LinearityTerms {
  double standing = 0.0;
  double sitting = 0.0;
  [[nodiscard]] double total() const noexcept { return standing + sitting; }
};

/// Mean absolute deviation of the hip angle from the straight line between
/// the transition end postures, relative to the hip travel.
[[nodiscard]] inline LinearityTerms motion_terms(const DesignVector& d, const EngagementAngles& a,
                                                 const NormConstants& n,
                                                 const JointLimit& hip = default_joint_limits()[kHip]) {
  const int m = n.m;
  LinearityTerms t;
  const double span_st = a.gamma - a.q_s;
  t.standing = trapezoid_sum(m, [&](int k) {
                 const double q2 = sweep_angle(a, m, k, Direction::SitToStand);
                 const double line = a.gamma + (a.q_s - a.gamma) * (q2 - a.q_o) / (a.q_f - a.q_o);
                 return std::abs(coupling_map_standing(d, a, q2, hip) - line);
               }) / (m * std::abs(span_st));
  const double b = a.sit_engage_hip();
  const double span_si = a.delta - b;
  t.sitting = trapezoid_sum(m, [&](int k) {
                const double q2 = sweep_angle(a, m, k, Direction::StandToSit);
                const double line = b + (a.delta - b) * (a.q_f - q2) / (a.q_f - a.q_o);
                return std::abs(coupling_map_sitting(d, a, q2, hip) - line);
              }) / (m * std::abs(span_si));
  return t;
}

[[nodiscard]] inline double objective_motion_linearity(const DesignVector& d, const EngagementAngles& a,
                                                       const NormConstants& n) {
  return motion_terms(d, a, n).total();
}

/// Knee torque of the lossless linear spring model, without stroke limits.
[[nodiscard]] inline double ideal_actuator_torque(const ActuatorPlacement& pl, const GasSpring& s, double q2) {
  const double dx = spring_compression(pl, q2);
  return pl.spring_count * (s.f0 + s.ka * dx) * s.eta_t * spring_length_rate(pl, q2);
}

/// Deviation of Mo from the moment line M_l joining the ideal actuator
/// torques at the sweep ends, (1/(Mr m)) sum |Mo - M_l|.
[[nodiscard]] inline double torque_term(const std::vector<SweepPoint>& sw, const ActuatorPlacement& pl,
                                        const GasSpring& s, const EngagementAngles& a, const NormConstants& n) {
  const int m = static_cast<int>(sw.size()) - 1;
  const double t_o = ideal_actuator_torque(pl, s, a.q_o);
  const double t_f = ideal_actuator_torque(pl, s, a.q_f);
  return trapezoid_sum(m, [&](int k) {
           const double Ml = t_o + (t_f - t_o) * (sw[k].q2 - a.q_o) / (a.q_f - a.q_o);
           return std::abs(sw[k].knee.Mo - Ml);
         }) / (n.moment_ref * m);
}

struct TorqueTerms {
  double standing = 0.0;
  double sitting = 0.0;
  [[nodiscard]] double total() const noexcept { return standing + sitting; }
};

[[nodiscard]] inline TorqueTerms torque_terms(const DesignVector& d, const ActuatorPlacement& pl,
                                              const GasSpring& s, const BodyModel& body, const ExoModel& exo,
                                              const EngagementAngles& a, const NormConstants& n,
                                              const SimOptions& opt = {}) {
  SimOptions o = opt;
  o.dq = (a.q_f - a.q_o) / n.m;
  TorqueTerms t;
  t.standing = torque_term(quasi_static_sweep(body, exo, d, nullptr, nullptr, a, Direction::SitToStand, o),
                           pl, s, a, n);
  t.sitting = torque_term(quasi_static_sweep(body, exo, d, nullptr, nullptr, a, Direction::StandToSit, o),
                          pl, s, a, n);
  return t;
}

[[nodiscard]] inline double objective_torque_linearity(const DesignVector& d, const ActuatorPlacement& pl,
                                                       const GasSpring& s, const BodyModel& body,
                                                       const ExoModel& exo, const EngagementAngles& a,
                                                       const NormConstants& n, const SimOptions& opt = {}) {
  return torque_terms(d, pl, s, body, exo, a, n, opt).total();
}

// ---------------------------------------------------------------------------
// Candidate evaluation

/// Everything a candidate evaluation needs besides the design itself.
struct EvalContext {
  BodyModel body;
  ExoModel exo;
  EngagementAngles angles;
  ActuatorPlacement placement;
  GasSpring spring;
  DesignBounds bounds;
  NormConstants norms;
  SimOptions sim;
  double tolerance = 1e-3;
  /// Added to the violation when a design cannot be evaluated at all.
  double failure_penalty = 1.0;
  /// Upper bound on the normalised sitting-sweep peak of `body`; <= 0 disables it.
  double sitting_peak_limit = 0.0;
};

struct Candidate {
  DesignVector design;
  ObjectiveVector objectives;
  double constraint_violation = 0.0;
  bool feasible = false;
  std::string failure;  ///< why the sweeps could not be evaluated, if so
};

inline constexpr double kWorstObjective = 1e9;

/// Sum of the synchronisation residuals (rad), area exits (m) and scalar bound excess.
[[nodiscard]] inline double static_violation(const DesignVector& d, const EngagementAngles& a,
                                             const DesignBounds& b) {
  return std::abs(standing_sync_residual(d, a)) + std::abs(sitting_sync_residual(d, a)) +
         area_violation(d, b) + scalar_bound_violation(d, b);
}

/// How far a design's sweeps are from being evaluable, as sweep averages:
/// hip travel beyond the joint range (rad), hip loads of the wrong sign for
/// the engaged circuit and non-positive sitting knee moments (both relative
/// to moment_ref).
struct SweepDefects {
  double hip_range = 0.0;
  double slack = 0.0;
  double sitting_moment = 0.0;
  double sitting_peak = 0.0;  ///< excess of the normalised sitting peak over its limit
  [[nodiscard]] double total() const noexcept { return hip_range + slack + sitting_moment + sitting_peak; }
};

struct SweepEvaluation {
  std::vector<SweepPoint> standing, sitting;
  SweepDefects defects;
};

/// Sweeps both directions without throwing on mechanism failures.
[[nodiscard]] inline SweepEvaluation evaluate_sweeps(const DesignVector& d, const EvalContext& ctx) {
  SweepEvaluation ev;
  SimOptions o = ctx.sim;
  o.dq = (ctx.angles.q_f - ctx.angles.q_o) / ctx.norms.m;
  o.hip_limit = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const HumanChain chain = composite_chain(ctx.body, ctx.exo);
  const JointVector zero = JointVector::Zero();
  const JointLimit& hip = ctx.sim.hip_limit;
  const double Mr = ctx.norms.moment_ref;
  for (Direction dir : {Direction::SitToStand, Direction::StandToSit}) {
    auto& out = dir == Direction::SitToStand ? ev.standing : ev.sitting;
    const int m = ctx.norms.m;
    const double q2_0 = dir == Direction::SitToStand ? ctx.angles.q_o : ctx.angles.q_f;
    const JointVector q_start = posture(q2_0, coupled_hip(d, ctx.angles, dir, q2_0, o.hip_limit), o.fixed);
    for (int k = 0; k <= m; ++k) {
      SweepPoint p;
      p.q2 = sweep_angle(ctx.angles, m, k, dir);
      p.q3 = coupled_hip(d, ctx.angles, dir, p.q2, o.hip_limit);
      const double w = trapezoid_weight(k, m) / m;
      ev.defects.hip_range += w * std::max({0.0, hip.min - p.q3, p.q3 - hip.max});
      const auto tau = joint_loads(chain, ctx.exo, posture(p.q2, p.q3, o.fixed), zero, zero, q_start, o.gravity);
      p.tau2 = tau[kKnee];
      p.tau3 = tau[kHip];
      const double wrong = dir == Direction::SitToStand ? p.tau3 : -p.tau3;
      if (wrong > 0.0) {
        ev.defects.slack += w * wrong / Mr;
      } else {
        p.knee = coupled_knee_moment(d, ctx.angles, dir, p.q2, p.tau2, p.tau3);
        if (dir == Direction::StandToSit && !(p.knee.Mo > 0.0)) {
          ev.defects.sitting_moment += w * (-p.knee.Mo / Mr);
        }
        if (dir == Direction::StandToSit && ctx.sitting_peak_limit > 0.0) {
          ev.defects.sitting_peak = std::max(ev.defects.sitting_peak, p.knee.Mo / Mr - ctx.sitting_peak_limit);
        }
      }
      out.push_back(p);
    }
  }
  return ev;
}

[[nodiscard]] inline Candidate evaluate_candidate(const DesignVector& d, const EvalContext& ctx) {
  Candidate c;
  c.design = d;
  c.objectives = {kWorstObjective, kWorstObjective, kWorstObjective};
  for (double x : d.to_array()) {
    if (!std::isfinite(x)) {
      c.constraint_violation = std::numeric_limits<double>::infinity();
      c.failure = "non-finite design";
      return c;
    }
  }
  if (!(d.r1 > 0.0) || !(d.r2 > 0.0)) {
    c.constraint_violation = scalar_bound_violation(d, ctx.bounds) + ctx.failure_penalty;
    c.failure = "non-positive pulley radius";
    return c;
  }
  c.constraint_violation = static_violation(d, ctx.angles, ctx.bounds);

  try {
    // The sweeps are evaluated even when the static constraints fail so
    // that the violation ranks every design on the same scale.
    const auto ev = evaluate_sweeps(d, ctx);
    const auto& def = ev.defects;
    if (def.total() > 0.0) {
      // Always infeasible, graded by the size of the defect.
      c.constraint_violation += ctx.tolerance + def.total();
      c.failure = def.hip_range > 0.0 ? "coupled hip angle outside the joint range"
                  : def.slack > 0.0          ? "wire slack during the transition"
                  : def.sitting_moment > 0.0 ? "non-positive knee moment in the sitting sweep"
                                             : "sitting knee moment above the design limit";
      return c;
    }
    c.objectives.j_moment = moment_terms(detail::moments(ev.standing), detail::moments(ev.sitting), ctx.norms).total();
    c.objectives.j_motion = motion_terms(d, ctx.angles, ctx.norms, ctx.sim.hip_limit).total();
    c.objectives.j_torque = torque_term(ev.standing, ctx.placement, ctx.spring, ctx.angles, ctx.norms) +
                            torque_term(ev.sitting, ctx.placement, ctx.spring, ctx.angles, ctx.norms);
    if (c.constraint_violation > ctx.tolerance) {
      c.objectives = {kWorstObjective, kWorstObjective, kWorstObjective};
      return c;
    }
  } catch (const Error& e) {
    c.objectives = {kWorstObjective, kWorstObjective, kWorstObjective};
    c.constraint_violation += ctx.failure_penalty;
    c.failure = e.what();
    return c;
  }
  c.feasible = true;
  return c;
}

}  // namespace stsexo
