#pragma once

/**
 * @file gas_spring.hpp
 * @brief Gas-spring force models and the knee actuator they drive.
 *
 * The spring is mounted between a on the thigh link and b on the base link
 * and is fully extended in the standing posture; sitting down compresses it
 * by dx = l(q_stand) - l(q2), with l = |R(q2) a - b|.
 */

#include <cmath>
#include <string>
#include <vector>

#include "stsexo/csv.hpp"
#include "stsexo/errors.hpp"
#include "stsexo/geometry.hpp"

namespace stsexo {

enum class ForceMode { Ideal, Fitted };

/// Direction of spring travel, selecting the hysteresis branch in fitted mode.
enum class SpringMotion { Static, Compression, Extension };

struct DirectionAsymmetry {
  double compression_scale = 1.0;
  double extension_scale = 1.0;
};

struct GasSpring {
  std::string name = "spring";
  double f0 = 300.0;   ///< N, force at zero compression
  double ka = 2000.0;  ///< N/m
  double Da = 0.0;     ///< N s/m
  std::vector<double> lambda{300.0, 2000.0, 0.0};  ///< fitted polynomial, ascending powers
  double eta_t = 1.0;
  double stroke = 0.1;  ///< m
  ForceMode force_mode = ForceMode::Ideal;
  DirectionAsymmetry direction_asymmetry;

  void validate() const {
    if (!(f0 > 0.0)) throw RangeError("spring f0 must be positive");
    if (!(stroke > 0.0)) throw RangeError("spring stroke must be positive");
    if (!(eta_t > 0.0 && eta_t <= 1.0)) throw RangeError("spring efficiency must lie in (0, 1]");
    if (!(Da >= 0.0)) throw RangeError("spring damping must be non-negative");
    if (force_mode == ForceMode::Fitted && lambda.empty()) throw RangeError("fitted spring needs coefficients");
  }
};

/// Horner evaluation of sum_k c[k] x^k.
[[nodiscard]] inline double polyval(const std::vector<double>& c, double x) noexcept {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

/**
 * Axial spring force (N) at compression dx and compression rate dxdt.
 *
 * The hysteresis branch follows the sign of dxdt unless `motion` names it.
 * A static evaluation in fitted mode uses the mean of the two branches.
 */
[[nodiscard]] inline double spring_force(const GasSpring& s, double dx, double dxdt,
                                         SpringMotion motion = SpringMotion::Static) {
  constexpr double tol = 1e-9;
  if (!std::isfinite(dx) || !std::isfinite(dxdt)) throw NumericError("non-finite spring state");
  if (dx < -tol || dx > s.stroke + tol) throw StrokeError("spring compression outside the stroke");
  if (s.force_mode == ForceMode::Ideal) return (s.f0 + s.ka * dx) * s.eta_t + s.Da * dxdt;

  if (motion == SpringMotion::Static) {
    if (dxdt > 0.0) motion = SpringMotion::Compression;
    if (dxdt < 0.0) motion = SpringMotion::Extension;
  }
  const auto& a = s.direction_asymmetry;
  double scale = 0.5 * (a.compression_scale + a.extension_scale);
  if (motion == SpringMotion::Compression) scale = a.compression_scale;
  if (motion == SpringMotion::Extension) scale = a.extension_scale;
  return polyval(s.lambda, dx) * s.eta_t * scale + s.Da * dxdt;
}

struct ActuatorPlacement {
  Vec2 a = Vec2(0.2, 0.0);    ///< thigh frame
  Vec2 b = Vec2(0.0, -0.2);   ///< base frame
  int spring_count = 2;
  double extended_knee_angle = kPi / 2;  ///< knee angle at which the spring is fully extended

  void validate() const {
    if (spring_count != 2 && spring_count != 3) throw RangeError("spring_count must be 2 or 3");
    if (!a.allFinite() || !b.allFinite()) throw GeometryError("non-finite mounting point");
  }
};

[[nodiscard]] inline double spring_length(const ActuatorPlacement& p, double q2) {
  return (rotate(p.a, q2) - p.b).norm();
}

/// dl/dq2 of the mounting distance.
[[nodiscard]] inline double spring_length_rate(const ActuatorPlacement& p, double q2) {
  const Vec2 a = rotate(p.a, q2);
  const Vec2 d = a - p.b;
  const double len = d.norm();
  if (len < 1e-12) throw GeometryError("coincident mounting points");
  return cross(a, d) / len;
}

[[nodiscard]] inline double spring_compression(const ActuatorPlacement& p, double q2) {
  return spring_length(p, p.extended_knee_angle) - spring_length(p, q2);
}

/**
 * Knee torque (N m) of `spring_count` parallel springs, positive extending
 * the knee. Compression rate is -dl/dq2 * q2d.
 */
[[nodiscard]] inline double actuator_torque(const ActuatorPlacement& p, const GasSpring& s, double q2,
                                            double q2d, SpringMotion motion = SpringMotion::Static) {
  const double rate = spring_length_rate(p, q2);
  const double dx = spring_compression(p, q2);
  const double force = spring_force(s, dx, -rate * q2d, motion);
  return p.spring_count * force * rate;
}

/// Spring potential energy (J) of the lossless ideal model, zero when extended.
[[nodiscard]] inline double spring_energy(const ActuatorPlacement& p, const GasSpring& s, double q2) {
  const double dx = spring_compression(p, q2);
  return p.spring_count * (s.f0 * dx + 0.5 * s.ka * dx * dx);
}

[[nodiscard]] inline std::vector<GasSpring> parse_spring_catalog(const csv::Table& t,
                                                                 ForceMode mode = ForceMode::Ideal) {
  const std::vector<std::string> cols = {"name",    "f0",      "ka",      "Da",   "stroke",
                                         "lambda0", "lambda1", "lambda2", "eta_t"};
  std::vector<std::ptrdiff_t> idx;
  for (const auto& c : cols) {
    idx.push_back(t.column(c));
    if (idx.back() < 0) throw SchemaError("spring catalog missing column " + c);
  }
  std::vector<GasSpring> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.row_lines[r];
    auto num = [&](std::size_t k) { return csv::to_double(row[idx[k]], line); };
    GasSpring s;
    s.name = row[idx[0]];
    s.f0 = num(1);
    s.ka = num(2);
    s.Da = num(3);
    s.stroke = num(4);
    s.lambda = {num(5), num(6), num(7)};
    s.eta_t = num(8);
    s.force_mode = mode;
    try {
      s.validate();
    } catch (const RangeError& e) {
      throw SchemaError("catalog line " + std::to_string(line) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw SchemaError("spring catalog is empty");
  return out;
}

[[nodiscard]] inline std::vector<GasSpring> load_spring_catalog(const std::string& path,
                                                                ForceMode mode = ForceMode::Ideal) {
  return parse_spring_catalog(csv::read_file(path), mode);
}

}  // namespace stsexo
