#pragma once

/**
 * @file sts_sim.hpp
 * @brief Staged sit-to-stand / stand-to-sit simulation of a user wearing the
 * exoskeleton.
 *
 * The exoskeleton links are strapped to the shank, thigh and pelvis and move
 * with them, so the loads are computed on a composite chain in which each exo
 * link is merged into its body segment. During a transition the hip follows
 * the engaged wire circuit, which leaves the knee angle as the single degree
 * of freedom.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stsexo/anthro.hpp"
#include "stsexo/csv.hpp"
#include "stsexo/dynamics.hpp"
#include "stsexo/errors.hpp"
#include "stsexo/gas_spring.hpp"
#include "stsexo/mechanism.hpp"

namespace stsexo {

/// Exoskeleton links: [0] base (shank side), [1] thigh, [2] pelvis.
struct ExoModel {
  std::array<double, 3> link_masses{10.0, 3.5, 3.0};
  std::array<double, 3> link_lengths{0.50, 0.40, 0.30};
  std::array<double, 3> link_com_offsets{0.25, 0.20, 0.15};
  std::array<double, 3> link_inertias{10.0 * 0.25 / 12.0, 3.5 * 0.16 / 12.0, 3.0 * 0.09 / 12.0};
  std::array<double, 2> interface_stiffness{0.0, 0.0};  ///< knee, hip (N m/rad)
  std::array<double, 2> interface_damping{0.0, 0.0};    ///< knee, hip (N m s/rad)

  void validate() const {
    for (int i = 0; i < 3; ++i) {
      if (!(link_masses[i] >= 0.0) || !(link_inertias[i] >= 0.0) || !(link_lengths[i] >= 0.0) ||
          !(link_com_offsets[i] >= 0.0)) {
        throw RangeError("exoskeleton link parameters must be non-negative");
      }
    }
    for (int i = 0; i < 2; ++i) {
      if (!(interface_stiffness[i] >= 0.0) || !(interface_damping[i] >= 0.0)) {
        throw RangeError("interface stiffness and damping must be non-negative");
      }
    }
  }

  [[nodiscard]] static ExoModel massless() {
    ExoModel e;
    e.link_masses = {0.0, 0.0, 0.0};
    e.link_inertias = {0.0, 0.0, 0.0};
    return e;
  }
};

/// Body segment carrying each exoskeleton link.
inline constexpr std::array<int, 3> kExoHostSegment = {static_cast<int>(Segment::Shank),
                                                       static_cast<int>(Segment::Thigh),
                                                       static_cast<int>(Segment::Pelvis)};

/// Segment parameters of two rigidly joined bodies lying on the same link line.
[[nodiscard]] inline LinkParams merge_links(const LinkParams& host, double mass, double com_offset,
                                            double inertia) {
  LinkParams out = host;
  const double m = host.mass + mass;
  if (m <= 0.0) return out;
  const double c = (host.mass * host.com_offset + mass * com_offset) / m;
  out.mass = m;
  out.com_offset = c;
  out.inertia = host.inertia + host.mass * (host.com_offset - c) * (host.com_offset - c) + inertia +
                mass * (com_offset - c) * (com_offset - c);
  return out;
}

[[nodiscard]] inline HumanChain composite_chain(const BodyModel& body, const ExoModel& exo) {
  HumanChain c = body.chain();
  for (int i = 0; i < 3; ++i) {
    auto& link = c.links[kExoHostSegment[i]];
    link = merge_links(link, exo.link_masses[i], exo.link_com_offsets[i], exo.link_inertias[i]);
  }
  return c;
}

/// Joint angles held fixed during a transition.
struct FixedJoints {
  double ankle = 0.0;
  double spine = 0.0;
  double shoulder = 0.0;
  double elbow = deg2rad(-90.0);  ///< forearms pointing forward, arms folded
  double wrist = 0.0;
};

[[nodiscard]] inline JointVector posture(double q2, double q3, const FixedJoints& f = {}) {
  JointVector q;
  q << f.ankle, q2, q3, f.spine, f.shoulder, f.elbow, f.wrist;
  return q;
}

// ---------------------------------------------------------------------------
// Stage machine

enum class Stage { SeatedFree = 0, SitToStand, Standing, StandToSit, Seated };

[[nodiscard]] inline std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::SeatedFree: return "seated_free";
    case Stage::SitToStand: return "sit_to_stand";
    case Stage::Standing: return "standing";
    case Stage::StandToSit: return "stand_to_sit";
    case Stage::Seated: return "seated";
  }
  return "unknown";
}

[[nodiscard]] inline Stage next_stage(Stage s) {
  return static_cast<Stage>((static_cast<int>(s) + 1) % 5);
}

struct StageState {
  Stage stage = Stage::SeatedFree;
  bool lock_engaged = false;

  /// Driving is allowed only while resting on a locked mechanism.
  [[nodiscard]] bool locomotion_permitted() const noexcept {
    return lock_engaged && (stage == Stage::Standing || stage == Stage::Seated);
  }
};

/// Advances one step along the cycle. Arriving at a rest stage engages the
/// lock; leaving a stage requires the lock to be released first.
[[nodiscard]] inline StageState advance(const StageState& s, Stage to) {
  if (to != next_stage(s.stage)) throw RangeError("stage transitions must follow the cycle");
  if (s.lock_engaged && s.stage != Stage::Seated) throw RangeError("release the lock before moving");
  StageState out;
  out.stage = to;
  out.lock_engaged = (to == Stage::Standing || to == Stage::Seated);
  // Seated -> SeatedFree keeps the lock until the user releases it.
  if (s.stage == Stage::Seated) out.lock_engaged = s.lock_engaged;
  return out;
}

[[nodiscard]] inline StageState release_lock(StageState s) {
  s.lock_engaged = false;
  return s;
}

enum class Circuit { None, P1, P2 };

[[nodiscard]] inline std::string_view circuit_name(Circuit c) {
  switch (c) {
    case Circuit::None: return "none";
    case Circuit::P1: return "p1";
    case Circuit::P2: return "p2";
  }
  return "unknown";
}

/**
 * Circuit engaged at hip angle q3. `previous` is the result of the last call;
 * an engaged circuit only lets go once q3 has moved `hysteresis` back past
 * its threshold.
 */
[[nodiscard]] inline Circuit check_engagement(const EngagementAngles& a, double q3, const StageState& s,
                                              Circuit previous = Circuit::None,
                                              double hysteresis = deg2rad(0.5)) {
  if (s.lock_engaged) return Circuit::None;
  switch (s.stage) {
    case Stage::SitToStand: return Circuit::P1;
    case Stage::StandToSit: return Circuit::P2;
    case Stage::SeatedFree:
    case Stage::Seated: {
      const double threshold = a.gamma - (previous == Circuit::P1 ? hysteresis : 0.0);
      return q3 >= threshold ? Circuit::P1 : Circuit::None;
    }
    case Stage::Standing: {
      const double threshold = a.sit_engage_hip() + (previous == Circuit::P2 ? hysteresis : 0.0);
      return q3 <= threshold ? Circuit::P2 : Circuit::None;
    }
  }
  return Circuit::None;
}

// ---------------------------------------------------------------------------
// Loads

enum class Direction { SitToStand, StandToSit };
enum class SimMode { QuasiStatic, Dynamic };

[[nodiscard]] inline std::string_view direction_name(Direction d) {
  return d == Direction::SitToStand ? "sit_to_stand" : "stand_to_sit";
}

struct SimOptions {
  double gravity = kStandardGravity;
  double dq = deg2rad(0.5);       ///< quasi-static knee resolution
  double duration = 7.0;          ///< nominal transition time of a quasi-static trace (s)
  double moment_ref = 0.0;        ///< normalisation; <= 0 computes the 90 kg reference
  FixedJoints fixed;
  JointLimit hip_limit = default_joint_limits()[kHip];
  // dynamic mode
  double dt = 1e-3;
  double timeout = 20.0;
  double user_effort = 0.0;       ///< N m at the knee, along the direction of motion
  int record_every = 10;
};

/// Sample count of a sweep: m = (q_f - q_o) / dq intervals.
[[nodiscard]] inline int sweep_intervals(const EngagementAngles& a, double dq) {
  if (!(dq > 0.0)) throw RangeError("sweep resolution must be positive");
  return std::max(1, static_cast<int>(std::lround((a.q_f - a.q_o) / dq)));
}

[[nodiscard]] inline double sweep_angle(const EngagementAngles& a, int m, int k, Direction d) {
  const double s = static_cast<double>(k) / m;
  return d == Direction::SitToStand ? a.q_o + s * (a.q_f - a.q_o) : a.q_f - s * (a.q_f - a.q_o);
}

/// Joint torques of the composite chain with the interface stiffness
/// (about the start posture) acting at knee and hip.
[[nodiscard]] inline TorqueVector joint_loads(const HumanChain& chain, const ExoModel& exo,
                                              const JointVector& q, const JointVector& qd,
                                              const JointVector& qdd, const JointVector& q_start,
                                              double gravity) {
  TorqueVector tau = inverse_dynamics(chain, q, qd, qdd, gravity);
  tau[kKnee] += exo.interface_stiffness[0] * (q[kKnee] - q_start[kKnee]);
  tau[kHip] += exo.interface_stiffness[1] * (q[kHip] - q_start[kHip]);
  return tau;
}

[[nodiscard]] inline double coupled_hip(const DesignVector& d, const EngagementAngles& a, Direction dir,
                                        double q2, const JointLimit& hip) {
  return dir == Direction::SitToStand ? coupling_map_standing(d, a, q2, hip)
                                      : coupling_map_sitting(d, a, q2, hip);
}

[[nodiscard]] inline double coupled_slope(const DesignVector& d, Direction dir, double q2) {
  return dir == Direction::SitToStand ? coupling_slope_standing(d, q2) : coupling_slope_sitting(d, q2);
}

[[nodiscard]] inline KneeMoment coupled_knee_moment(const DesignVector& d, const EngagementAngles& a,
                                                    Direction dir, double q2, double tau2, double tau3) {
  return dir == Direction::SitToStand ? knee_moment_standing(d, a, q2, tau2, tau3)
                                      : knee_moment_sitting(d, a, q2, tau2, tau3);
}

[[nodiscard]] inline SpringMotion spring_motion(Direction d) {
  return d == Direction::SitToStand ? SpringMotion::Extension : SpringMotion::Compression;
}

/// Max static knee torque of a 90 kg, 1.75 m user seated at q_o over hip angles [delta, gamma].
[[nodiscard]] inline double reference_moment(const ExoModel& exo, const EngagementAngles& a,
                                             const SimOptions& opt = {},
                                             const SegmentRatioTable& table = default_segment_table()) {
  const BodyModel ref = build_body_model({90.0, 1.75, 3, "reference"}, table);
  const HumanChain chain = composite_chain(ref, exo);
  const int n = std::max(1, static_cast<int>(std::lround((a.gamma - a.delta) / opt.dq)));
  double best = 0.0;
  const JointVector zero = JointVector::Zero();
  for (int k = 0; k <= n; ++k) {
    const double q3 = a.delta + (a.gamma - a.delta) * k / n;
    const auto tau = inverse_dynamics(chain, posture(a.q_o, q3, opt.fixed), zero, zero, kStandardGravity);
    best = std::max(best, tau[kKnee]);
  }
  if (!(best > 0.0)) throw NumericError("reference knee moment is not positive");
  return best;
}

struct SweepPoint {
  double q2 = 0.0;
  double q3 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
  KneeMoment knee;
  double tau_a = 0.0;
};

/// Static loads along the coupling of one direction, at m + 1 evenly spaced knee angles.
/// With `with_actuator` false the spring is not evaluated (tau_a = 0).
[[nodiscard]] inline std::vector<SweepPoint> quasi_static_sweep(
    const BodyModel& body, const ExoModel& exo, const DesignVector& d, const ActuatorPlacement* placement,
    const GasSpring* spring, const EngagementAngles& a, Direction dir, const SimOptions& opt = {}) {
  const HumanChain chain = composite_chain(body, exo);
  const int m = sweep_intervals(a, opt.dq);
  const double q2_0 = dir == Direction::SitToStand ? a.q_o : a.q_f;
  const JointVector q_start = posture(q2_0, coupled_hip(d, a, dir, q2_0, opt.hip_limit), opt.fixed);
  const JointVector zero = JointVector::Zero();
  std::vector<SweepPoint> out;
  out.reserve(m + 1);
  for (int k = 0; k <= m; ++k) {
    SweepPoint p;
    p.q2 = sweep_angle(a, m, k, dir);
    p.q3 = coupled_hip(d, a, dir, p.q2, opt.hip_limit);
    const auto tau = joint_loads(chain, exo, posture(p.q2, p.q3, opt.fixed), zero, zero, q_start, opt.gravity);
    p.tau2 = tau[kKnee];
    p.tau3 = tau[kHip];
    p.knee = coupled_knee_moment(d, a, dir, p.q2, p.tau2, p.tau3);
    if (placement && spring) p.tau_a = actuator_torque(*placement, *spring, p.q2, 0.0, spring_motion(dir));
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// COM

struct ComPair {
  ComPoint user = ComPoint::Zero();
  ComPoint system = ComPoint::Zero();
};

/// COM of the user alone and of user plus exoskeleton at the coupled posture.
[[nodiscard]] inline ComPair combined_com(const BodyModel& body, const ExoModel& exo, double q2, double q3,
                                          const FixedJoints& fixed = {}) {
  const JointVector q = posture(q2, q3, fixed);
  ComPair out;
  out.user = sesc_com(body, q);
  out.system = sesc_com(composite_chain(body, exo), q);
  return out;
}

// ---------------------------------------------------------------------------
// Transition traces

struct TraceSample {
  double t = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double Mo = 0.0;
  double Mo_norm = 0.0;
  double tau_a = 0.0;
  ComPoint com = ComPoint::Zero();
  Stage stage = Stage::SeatedFree;
};

struct EngagementEvent {
  Circuit circuit = Circuit::None;
  double t = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

struct TransitionTrace {
  Direction direction = Direction::SitToStand;
  SimMode mode = SimMode::QuasiStatic;
  double moment_ref = 1.0;
  EngagementEvent engagement;
  std::vector<TraceSample> samples;
  /// Knee angle at which the hip load first reversed and the engaged wire
  /// went slack (dynamic mode only); the user's hip carries the load there.
  std::optional<double> slack_onset;
};

namespace detail {

inline double resolve_reference(const ExoModel& exo, const EngagementAngles& a, const SimOptions& opt) {
  return opt.moment_ref > 0.0 ? opt.moment_ref : reference_moment(exo, a, opt);
}

inline Stage moving_stage(Direction d) { return d == Direction::SitToStand ? Stage::SitToStand : Stage::StandToSit; }
inline Stage resting_stage(Direction d) { return d == Direction::SitToStand ? Stage::Standing : Stage::Seated; }

/// Positive when the actuator wins over the load in the direction of motion.
inline double drive_margin(Direction d, double tau_a, double Mo) {
  return d == Direction::SitToStand ? tau_a - Mo : Mo - tau_a;
}

inline TransitionTrace quasi_static_trace(const BodyModel& body, const ExoModel& exo, const DesignVector& d,
                                          const ActuatorPlacement& pl, const GasSpring& s,
                                          const EngagementAngles& a, Direction dir, const SimOptions& opt) {
  TransitionTrace tr;
  tr.direction = dir;
  tr.mode = SimMode::QuasiStatic;
  tr.moment_ref = resolve_reference(exo, a, opt);
  const auto sweep = quasi_static_sweep(body, exo, d, &pl, &s, a, dir, opt);
  const int m = static_cast<int>(sweep.size()) - 1;
  tr.engagement = {dir == Direction::SitToStand ? Circuit::P1 : Circuit::P2, 0.0, sweep.front().q2,
                   sweep.front().q3};
  for (int k = 0; k <= m; ++k) {
    const auto& p = sweep[k];
    if (drive_margin(dir, p.tau_a, p.knee.Mo) <= 0.0) {
      throw StallError("actuator cannot carry the transition", p.q2);
    }
    TraceSample smp;
    smp.t = opt.duration * k / m;
    smp.q2 = p.q2;
    smp.q3 = p.q3;
    smp.Mo = p.knee.Mo;
    smp.Mo_norm = p.knee.Mo / tr.moment_ref;
    smp.tau_a = p.tau_a;
    smp.com = sesc_com(body, posture(p.q2, p.q3, opt.fixed));
    smp.stage = k == m ? resting_stage(dir) : moving_stage(dir);
    tr.samples.push_back(smp);
  }
  return tr;
}

/// Reduced single-coordinate dynamics along the engaged coupling.
struct ReducedModel {
  const BodyModel& body;
  const ExoModel& exo;
  const DesignVector& d;
  const ActuatorPlacement& pl;
  const GasSpring& s;
  const EngagementAngles& a;
  Direction dir;
  const SimOptions& opt;
  HumanChain chain;
  JointVector q_start;
  mutable std::optional<double> slack_onset;

  ReducedModel(const BodyModel& b, const ExoModel& e, const DesignVector& dv, const ActuatorPlacement& p,
               const GasSpring& sp, const EngagementAngles& an, Direction di, const SimOptions& o)
      : body(b), exo(e), d(dv), pl(p), s(sp), a(an), dir(di), opt(o), chain(composite_chain(b, e)) {
    const double q2_0 = dir == Direction::SitToStand ? a.q_o : a.q_f;
    q_start = posture(q2_0, coupled_hip(d, a, dir, q2_0, opt.hip_limit), opt.fixed);
  }

  [[nodiscard]] double clamp_knee(double q2) const { return std::clamp(q2, a.q_o, a.q_f); }

  [[nodiscard]] double slope_rate(double q2) const {
    constexpr double h = 1e-6;
    const double lo = std::max(a.q_o, q2 - h), hi = std::min(a.q_f, q2 + h);
    return (coupled_slope(d, dir, hi) - coupled_slope(d, dir, lo)) / (hi - lo);
  }

  /// Knee moment for the given knee motion (without interface damping).
  [[nodiscard]] double knee_moment(double q2, double q2d, double q2dd) const {
    const double q3 = coupled_hip(d, a, dir, q2, opt.hip_limit);
    const double g1 = coupled_slope(d, dir, q2);
    const double g2 = slope_rate(q2);
    JointVector qd = JointVector::Zero(), qdd = JointVector::Zero();
    qd[kKnee] = q2d;
    qd[kHip] = g1 * q2d;
    qdd[kKnee] = q2dd;
    qdd[kHip] = g1 * q2dd + g2 * q2d * q2d;
    const auto tau = joint_loads(chain, exo, posture(q2, q3, opt.fixed), qd, qdd, q_start, opt.gravity);
    // A reversed hip load slackens the engaged wire; the user's hip holds it.
    const double carried = dir == Direction::SitToStand ? std::min(tau[kHip], 0.0) : std::max(tau[kHip], 0.0);
    if (carried != tau[kHip] && !slack_onset) slack_onset = q2;
    return coupled_knee_moment(d, a, dir, q2, tau[kKnee], carried).Mo;
  }

  [[nodiscard]] double damping(double q2) const {
    const double g1 = coupled_slope(d, dir, q2);
    return exo.interface_damping[0] + exo.interface_damping[1] * g1 * g1;
  }

  [[nodiscard]] double actuator(double q2, double q2d) const {
    const double v = -spring_length_rate(pl, q2) * q2d;
    const SpringMotion m = v > 0.0 ? SpringMotion::Compression
                           : v < 0.0 ? SpringMotion::Extension
                                     : spring_motion(dir);
    return actuator_torque(pl, s, q2, q2d, m);
  }

  [[nodiscard]] double acceleration(double q2_raw, double q2d) const {
    const double q2 = clamp_knee(q2_raw);
    const double sign = dir == Direction::SitToStand ? 1.0 : -1.0;
    const double drive = actuator(q2, q2d) + sign * opt.user_effort - damping(q2) * q2d;
    const double A = knee_moment(q2, q2d, 0.0);
    const double B = knee_moment(q2, q2d, 1.0) - A;
    if (!(B > 0.0)) throw SingularityError("reduced inertia is not positive");
    return (drive - A) / B;
  }
};

inline TransitionTrace dynamic_trace(const BodyModel& body, const ExoModel& exo, const DesignVector& d,
                                     const ActuatorPlacement& pl, const GasSpring& s,
                                     const EngagementAngles& a, Direction dir, const SimOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.timeout > 0.0)) throw RangeError("time step and timeout must be positive");
  TransitionTrace tr;
  tr.direction = dir;
  tr.mode = SimMode::Dynamic;
  tr.moment_ref = resolve_reference(exo, a, opt);
  const ReducedModel model(body, exo, d, pl, s, a, dir, opt);
  const double sign = dir == Direction::SitToStand ? 1.0 : -1.0;
  const double q_end = dir == Direction::SitToStand ? a.q_f : a.q_o;

  double q2 = dir == Direction::SitToStand ? a.q_o : a.q_f;
  double v = 0.0;
  tr.engagement = {dir == Direction::SitToStand ? Circuit::P1 : Circuit::P2, 0.0, q2,
                   coupled_hip(d, a, dir, q2, opt.hip_limit)};

  auto record = [&](double t, double qk, double vk, Stage stage) {
    TraceSample smp;
    smp.t = t;
    smp.q2 = qk;
    smp.q3 = coupled_hip(d, a, dir, qk, opt.hip_limit);
    const double acc = stage == moving_stage(dir) ? model.acceleration(qk, vk) : 0.0;
    smp.Mo = model.knee_moment(qk, vk, acc);
    smp.Mo_norm = smp.Mo / tr.moment_ref;
    smp.tau_a = model.actuator(qk, vk);
    smp.com = sesc_com(body, posture(qk, smp.q3, opt.fixed));
    smp.stage = stage;
    tr.samples.push_back(smp);
  };

  if (sign * model.acceleration(q2, 0.0) <= 0.0) throw StallError("actuator cannot start the transition", q2);
  record(0.0, q2, v, moving_stage(dir));

  const long steps = static_cast<long>(std::ceil(opt.timeout / opt.dt));
  for (long i = 1; i <= steps; ++i) {
    const double h = opt.dt;
    const double k1q = v, k1v = model.acceleration(q2, v);
    const double k2q = v + 0.5 * h * k1v, k2v = model.acceleration(q2 + 0.5 * h * k1q, k2q);
    const double k3q = v + 0.5 * h * k2v, k3v = model.acceleration(q2 + 0.5 * h * k2q, k3q);
    const double k4q = v + h * k3v, k4v = model.acceleration(q2 + h * k3q, k4q);
    const double q_next = q2 + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    const double v_next = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    const double t = i * h;
    if (sign * (q_next - q_end) >= 0.0) {
      // arrival: interpolate the crossing time within the step
      const double frac = (q_end - q2) / (q_next - q2);
      const double t_end = t - h + frac * h;
      const double v_end = v + frac * (v_next - v);
      record(std::max(t_end, tr.samples.back().t + 1e-12), q_end, v_end, resting_stage(dir));
      tr.slack_onset = model.slack_onset;
      return tr;
    }
    q2 = q_next;
    v = v_next;
    if (sign * v <= 0.0) throw StallError("transition stalled", q2);
    if (i % std::max(1, opt.record_every) == 0) record(t, q2, v, moving_stage(dir));
  }
  throw StallError("transition timed out", q2);
}

}  // namespace detail

/// Runs one transition. Quasi-static traces sample every `dq` over a nominal
/// `duration`; dynamic traces integrate the reduced equation of motion with RK4.
[[nodiscard]] inline TransitionTrace simulate_transition(const BodyModel& body, const ExoModel& exo,
                                                         const DesignVector& design,
                                                         const ActuatorPlacement& placement,
                                                         const GasSpring& spring, const EngagementAngles& angles,
                                                         Direction direction, SimMode mode,
                                                         const SimOptions& opt = {}) {
  exo.validate();
  angles.validate();
  spring.validate();
  placement.validate();
  if (mode == SimMode::QuasiStatic) {
    return detail::quasi_static_trace(body, exo, design, placement, spring, angles, direction, opt);
  }
  return detail::dynamic_trace(body, exo, design, placement, spring, angles, direction, opt);
}

/// Largest |Mo - Mo_static(q2)| / moment_ref over a dynamic trace once it is
/// moving. The release sample is skipped: at zero velocity the whole drive
/// imbalance appears as inertia whatever the damping.
[[nodiscard]] inline double quasi_static_deviation(const TransitionTrace& tr, const BodyModel& body,
                                                   const ExoModel& exo, const DesignVector& d,
                                                   const EngagementAngles& a, const SimOptions& opt = {}) {
  const HumanChain chain = composite_chain(body, exo);
  const double q2_0 = tr.direction == Direction::SitToStand ? a.q_o : a.q_f;
  const JointVector q_start = posture(q2_0, coupled_hip(d, a, tr.direction, q2_0, opt.hip_limit), opt.fixed);
  const JointVector zero = JointVector::Zero();
  double worst = 0.0;
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const auto& smp = tr.samples[i];
    const auto tau = joint_loads(chain, exo, posture(smp.q2, smp.q3, opt.fixed), zero, zero, q_start, opt.gravity);
    const double Mo = coupled_knee_moment(d, a, tr.direction, smp.q2, tau[kKnee], tau[kHip]).Mo;
    worst = std::max(worst, std::abs(smp.Mo - Mo) / tr.moment_ref);
  }
  return worst;
}

inline void write_trace_csv(std::ostream& out, const TransitionTrace& tr) {
  out << "t,q2,q3,Mo,Mo_norm,tau_a,com_x,com_y,stage\n";
  for (const auto& s : tr.samples) {
    out << csv::fmt(s.t) << ',' << csv::fmt(s.q2) << ',' << csv::fmt(s.q3) << ',' << csv::fmt(s.Mo) << ','
        << csv::fmt(s.Mo_norm) << ',' << csv::fmt(s.tau_a) << ',' << csv::fmt(s.com.x()) << ','
        << csv::fmt(s.com.y()) << ',' << stage_name(s.stage) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Feasibility

struct FeasibilityVerdict {
  bool standing_ok = false;  ///< actuator exceeds the standing load everywhere
  bool sitting_ok = false;   ///< sitting load exceeds the actuator everywhere
  bool stroke_ok = false;
  bool coupling_ok = false;
  bool feasible = false;
  double standing_margin = 0.0;  ///< min (tau_a - Mo) over the standing sweep (N m)
  double sitting_margin = 0.0;   ///< min (Mo - tau_a) over the sitting sweep (N m)
  std::optional<double> stall_angle;
  std::string reason;
};

namespace detail {

/// Minimum drive margin along a sweep and the knee angle where it occurs.
inline std::pair<double, double> worst_margin(const std::vector<SweepPoint>& sw, Direction dir) {
  double worst = std::numeric_limits<double>::infinity(), at = sw.front().q2;
  for (const auto& p : sw) {
    const double m = drive_margin(dir, p.tau_a, p.knee.Mo);
    if (m < worst) worst = m, at = p.q2;
  }
  return {worst, at};
}

}  // namespace detail

[[nodiscard]] inline FeasibilityVerdict feasibility_report(const BodyModel& body, const ExoModel& exo,
                                                           const DesignVector& d, const ActuatorPlacement& pl,
                                                           const GasSpring& s, const EngagementAngles& a,
                                                           const SimOptions& opt = {}) {
  FeasibilityVerdict v;
  v.stroke_ok = true;
  const int m = sweep_intervals(a, opt.dq);
  for (int k = 0; k <= m; ++k) {
    const double dx = spring_compression(pl, sweep_angle(a, m, k, Direction::SitToStand));
    if (dx < -1e-9 || dx > s.stroke + 1e-9) v.stroke_ok = false;
  }
  std::vector<SweepPoint> st, si;
  try {
    st = quasi_static_sweep(body, exo, d, nullptr, nullptr, a, Direction::SitToStand, opt);
    si = quasi_static_sweep(body, exo, d, nullptr, nullptr, a, Direction::StandToSit, opt);
    v.coupling_ok = true;
  } catch (const CouplingInfeasible& e) {
    v.reason = e.what();
  } catch (const SlackWireError& e) {
    v.reason = e.what();
  }
  if (!v.coupling_ok) return v;
  if (!v.stroke_ok) {
    v.reason = "spring stroke exceeded";
    return v;
  }
  for (auto& p : st) p.tau_a = actuator_torque(pl, s, p.q2, 0.0, SpringMotion::Extension);
  for (auto& p : si) p.tau_a = actuator_torque(pl, s, p.q2, 0.0, SpringMotion::Compression);
  const auto [ms, at_s] = detail::worst_margin(st, Direction::SitToStand);
  const auto [mi, at_i] = detail::worst_margin(si, Direction::StandToSit);
  v.standing_margin = ms;
  v.sitting_margin = mi;
  v.standing_ok = ms > 0.0;
  v.sitting_ok = mi > 0.0;
  if (!v.standing_ok) {
    v.stall_angle = at_s;
    v.reason = "actuator below the standing load";
  } else if (!v.sitting_ok) {
    v.stall_angle = at_i;
    v.reason = "actuator above the sitting load";
  }
  v.feasible = v.standing_ok && v.sitting_ok && v.stroke_ok && v.coupling_ok;
  return v;
}

struct ComExcursion {
  double sit_to_stand = 0.0;  ///< horizontal user-COM travel before the spring lifts (m)
  double stand_to_sit = 0.0;  ///< horizontal user-COM travel before gravity overcomes the spring (m)
  double lift_hip = 0.0;      ///< hip angle at which the spring starts lifting
  double lower_hip = 0.0;     ///< hip angle at which the user starts descending
  bool lift_by_wire = false;  ///< the user had to lean all the way to the P1 engagement angle
  bool lower_by_wire = false; ///< the user had to lean all the way to the P2 engagement angle
};

namespace detail {

/// First hip angle between `from` and `to` at which `crossed(q3)` holds,
/// scanning in steps of `step` and refining by bisection; `to` when none.
template <class F>
std::pair<double, bool> first_crossing(F&& crossed, double from, double to, double step) {
  const double dir = to > from ? 1.0 : -1.0;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(to - from) / step)));
  double prev = from;
  if (crossed(from)) return {from, true};
  for (int k = 1; k <= n; ++k) {
    const double q = k == n ? to : from + dir * step * k;
    if (crossed(q)) {
      double lo = prev, hi = q;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (crossed(mid) ? hi : lo) = mid;
      }
      return {hi, true};
    }
    prev = q;
  }
  return {to, false};
}

}  // namespace detail

/**
 * Horizontal user-COM motion needed to operate the device. Sit-to-stand:
 * from the final sitting posture the user leans forward until the spring
 * torque at the seated knee angle exceeds the gravity load, or until the
 * standing circuit engages. Stand-to-sit: from upright standing the user
 * leans back until the load exceeds the spring torque, or until the
 * sitting circuit engages.
 */
[[nodiscard]] inline ComExcursion com_excursion(const BodyModel& body, const ExoModel& exo,
                                                const ActuatorPlacement& pl, const GasSpring& s,
                                                const EngagementAngles& a, const SimOptions& opt = {}) {
  const HumanChain chain = composite_chain(body, exo);
  const JointVector zero = JointVector::Zero();
  auto knee_load = [&](double q2, double q3) {
    const JointVector q = posture(q2, q3, opt.fixed);
    return joint_loads(chain, exo, q, zero, zero, q, opt.gravity)[kKnee];
  };
  auto com_x = [&](double q2, double q3) { return sesc_com(body, posture(q2, q3, opt.fixed)).x(); };
  constexpr double step = 0.25 * kPi / 180.0;
  ComExcursion e;

  const double ta_o = actuator_torque(pl, s, a.q_o, 0.0, SpringMotion::Extension);
  const auto [lift, lift_found] =
      detail::first_crossing([&](double q3) { return knee_load(a.q_o, q3) <= ta_o; }, a.delta, a.gamma, step);
  e.lift_hip = lift;
  e.lift_by_wire = !lift_found;
  e.sit_to_stand = std::abs(com_x(a.q_o, lift) - com_x(a.q_o, a.delta));

  const double ta_f = actuator_torque(pl, s, a.q_f, 0.0, SpringMotion::Compression);
  const auto [lower, lower_found] = detail::first_crossing(
      [&](double q3) { return knee_load(a.q_f, q3) >= ta_f; }, a.q_s, a.sit_engage_hip(), step);
  e.lower_hip = lower;
  e.lower_by_wire = !lower_found;
  e.stand_to_sit = std::abs(com_x(a.q_f, lower) - com_x(a.q_f, a.q_s));
  return e;
}

/// True when the set cells of a rectangular grid form one 4-connected
/// region. An empty set is not contiguous.
[[nodiscard]] inline bool feasible_region_contiguous(const std::vector<std::vector<bool>>& cells) {
  std::size_t total = 0;
  std::pair<std::size_t, std::size_t> seed{0, 0};
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (cells[r][c] && total++ == 0) seed = {r, c};
    }
  }
  if (total == 0) return false;
  std::vector<std::vector<bool>> seen(cells.size());
  for (std::size_t r = 0; r < cells.size(); ++r) seen[r].assign(cells[r].size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> stack{seed};
  seen[seed.first][seed.second] = true;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const auto [r, c] = stack.back();
    stack.pop_back();
    ++reached;
    auto visit = [&](std::size_t rr, std::size_t cc) {
      if (rr < cells.size() && cc < cells[rr].size() && cells[rr][cc] && !seen[rr][cc]) {
        seen[rr][cc] = true;
        stack.emplace_back(rr, cc);
      }
    };
    visit(r + 1, c);
    visit(r, c + 1);
    if (r > 0) visit(r - 1, c);
    if (c > 0) visit(r, c - 1);
  }
  return reached == total;
}

}  // namespace stsexo
