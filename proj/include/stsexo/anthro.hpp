#pragma once

/**
 * @file anthro.hpp
 * @brief Per-user planar body models scaled from total mass and stature.
 *
 * The body is a 7-link sagittal chain rooted at the ankle:
 *
 *   shank -> thigh -> pelvis -> torso (with head) -> upper arm -> forearm -> hand
 *
 * Paired limbs are lumped into one link. Joint coordinates follow
 * [ankle, knee, hip, torso, shoulder, elbow, wrist]. The x axis points
 * posterior (from the knees towards the seat), y points up. With this
 * convention:
 *   - ankle 0: shank vertical;
 *   - knee 0: thigh horizontal (seated), knee 90 deg: thigh vertical (standing);
 *   - hip 0 at the seated posture: torso vertical; positive leans forward;
 *     hip -90 deg at the standing posture: torso vertical;
 *   - shoulder 0: upper arm hanging along the torso.
 */

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "stsexo/csv.hpp"
#include "stsexo/errors.hpp"
#include "stsexo/geometry.hpp"
#include "stsexo/planar_chain.hpp"

namespace stsexo {

inline constexpr int kBodySegments = 7;

enum class Segment : int { Shank = 0, Thigh, Pelvis, Torso, UpperArm, Forearm, Hand };

enum Joint : int { kAnkle = 0, kKnee, kHip, kSpine, kShoulder, kElbow, kWrist };

inline constexpr std::array<std::string_view, kBodySegments> kSegmentNames = {
    "shank", "thigh", "pelvis", "torso", "upper_arm", "forearm", "hand"};

/// Chain angle offsets that realise the joint conventions above.
inline constexpr std::array<double, kBodySegments> kBodyJointOffsets = {
    kPi / 2, -kPi / 2, kPi / 2, 0.0, kPi, 0.0, 0.0};

inline constexpr double kMinSupportedMass = 40.0;
inline constexpr double kMaxSupportedMass = 100.0;

struct AnthroInput {
  double total_mass = 70.0;  ///< kg
  double height = 1.70;      ///< m
  int spring_count = 2;
  std::string label = "user";
};

using SegmentParams = LinkParams;
using HumanChain = PlanarChain<kBodySegments>;
using JointVector = HumanChain::Vector;

struct JointLimit {
  double min = 0.0;
  double max = 0.0;
  [[nodiscard]] bool contains(double q, double tol = 1e-9) const noexcept {
    return q >= min - tol && q <= max + tol;
  }
};

using JointLimits = std::array<JointLimit, kBodySegments>;

/// Hip range extends past the upright seated posture so forward leans are reachable.
[[nodiscard]] inline JointLimits default_joint_limits() {
  return {{{deg2rad(-30), deg2rad(30)},
           {deg2rad(0), deg2rad(100)},
           {deg2rad(-120), deg2rad(45)},
           {deg2rad(-30), deg2rad(60)},
           {deg2rad(-90), deg2rad(90)},
           {deg2rad(-90), deg2rad(90)},
           {deg2rad(-90), deg2rad(90)}}};
}

struct BodyModel {
  std::array<SegmentParams, kBodySegments> segments{};
  JointLimits joint_limits = default_joint_limits();
  double total_mass = 0.0;

  [[nodiscard]] const SegmentParams& segment(Segment s) const {
    return segments[static_cast<int>(s)];
  }

  [[nodiscard]] HumanChain chain() const {
    HumanChain c;
    c.links = segments;
    c.joint_offsets = kBodyJointOffsets;
    return c;
  }

  /// Checks the structural invariants; throws SchemaError.
  void validate() const {
    double m = 0.0;
    for (const auto& s : segments) {
      if (!(s.mass >= 0.0) || !(s.inertia >= 0.0) || !(s.length >= 0.0) ||
          !(s.com_offset >= 0.0) || s.com_offset > s.length + 1e-12) {
        throw SchemaError("segment parameters out of range");
      }
      m += s.mass;
    }
    if (std::abs(m - total_mass) > 1e-9) throw SchemaError("segment masses do not sum to total mass");
    for (const auto& l : joint_limits) {
      if (!(l.min < l.max)) throw SchemaError("empty joint limit interval");
    }
  }
};

struct SegmentRatio {
  double mass_frac = 0.0;
  double length_frac = 0.0;  ///< of stature
  double com_frac = 0.0;     ///< of segment length, from the proximal (chain-side) joint
  double gyr_frac = 0.0;     ///< radius of gyration about the COM, of segment length
};

struct SegmentRatioTable {
  std::array<SegmentRatio, kBodySegments> rows{};

  void validate() const {
    double sum = 0.0;
    for (const auto& r : rows) {
      if (!(r.mass_frac >= 0.0) || !(r.length_frac >= 0.0) || !(r.gyr_frac >= 0.0) ||
          !(r.com_frac >= 0.0 && r.com_frac <= 1.0)) {
        throw SchemaError("segment ratio out of range");
      }
      sum += r.mass_frac;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw SchemaError("mass fractions must sum to 1");
  }
};

/// Adult male ratios (de Leva adjustments of Zatsiorsky-Seluyanov), lumped
/// to the 7-link chain. Feet are folded into the shank, the head into the
/// torso; COM fractions are measured from the chain-side joint.
[[nodiscard]] inline SegmentRatioTable default_segment_table() {
  return {{{
      {0.1140, 0.2493, 0.4210, 0.3000},  // shank (both legs, with feet)
      {0.2832, 0.2425, 0.4095, 0.3290},  // thigh (both)
      {0.1117, 0.0837, 0.3885, 0.6150},  // pelvis: hip to omphalion
      {0.3923, 0.2628, 0.6140, 0.3700},  // torso: omphalion to shoulder, with head
      {0.0542, 0.1618, 0.5772, 0.2850},  // upper arm (both)
      {0.0324, 0.1545, 0.4574, 0.2760},  // forearm (both)
      {0.0122, 0.0495, 0.7900, 0.6280},  // hand (both)
  }}};
}

[[nodiscard]] inline SegmentRatioTable parse_segment_table(const csv::Table& t) {
  const std::array<std::string_view, 5> cols = {"segment", "mass_frac", "length_frac", "com_frac",
                                                "gyr_frac"};
  std::array<std::ptrdiff_t, 5> idx{};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    idx[i] = t.column(cols[i]);
    if (idx[i] < 0) throw SchemaError("segment table missing column " + std::string(cols[i]));
  }
  SegmentRatioTable table;
  std::array<bool, kBodySegments> seen{};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto& name = row[idx[0]];
    int s = -1;
    for (int k = 0; k < kBodySegments; ++k) {
      if (kSegmentNames[k] == name) s = k;
    }
    if (s < 0) throw SchemaError("unknown segment '" + name + "'");
    if (seen[s]) throw SchemaError("duplicate segment '" + name + "'");
    seen[s] = true;
    try {
      const auto line = t.row_lines[r];
      table.rows[s] = {csv::to_double(row[idx[1]], line), csv::to_double(row[idx[2]], line),
                       csv::to_double(row[idx[3]], line), csv::to_double(row[idx[4]], line)};
    } catch (const ParseError& e) {
      throw SchemaError(e.what());
    }
  }
  for (int k = 0; k < kBodySegments; ++k) {
    if (!seen[k]) throw SchemaError("segment table missing row " + std::string(kSegmentNames[k]));
  }
  table.validate();
  return table;
}

[[nodiscard]] inline SegmentRatioTable load_segment_table(const std::string& path) {
  return parse_segment_table(csv::read_file(path));
}

inline void validate(const AnthroInput& in) {
  if (!(in.total_mass > 0.0) || !(in.height > 0.0)) throw RangeError("mass and height must be positive");
  if (in.total_mass < kMinSupportedMass || in.total_mass > kMaxSupportedMass) {
    throw RangeError("total mass outside the supported range [40, 100] kg");
  }
  if (in.spring_count != 2 && in.spring_count != 3) throw RangeError("spring_count must be 2 or 3");
}

/// Scales the ratio table to one user. Masses are normalised by the table's
/// fraction sum so they add up to `total_mass`.
[[nodiscard]] inline BodyModel build_body_model(const AnthroInput& in,
                                                const SegmentRatioTable& table = default_segment_table()) {
  validate(in);
  table.validate();
  double frac_sum = 0.0;
  for (const auto& r : table.rows) frac_sum += r.mass_frac;

  BodyModel body;
  body.total_mass = in.total_mass;
  for (int k = 0; k < kBodySegments; ++k) {
    const auto& r = table.rows[k];
    auto& s = body.segments[k];
    s.mass = in.total_mass * r.mass_frac / frac_sum;
    s.length = r.length_frac * in.height;
    s.com_offset = r.com_frac * s.length;
    const double radius = r.gyr_frac * s.length;
    s.inertia = s.mass * radius * radius;
  }
  return body;
}

}  // namespace stsexo
