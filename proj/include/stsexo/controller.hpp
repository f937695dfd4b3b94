#pragma once

/**
 * @file controller.hpp
 * @brief Torso-pressure drive interface: centre of pressure, velocity
 * mapping with backward gesture detection, and a kinematic unicycle
 * simulator for exercising the mapping.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "stsexo/csv.hpp"
#include "stsexo/errors.hpp"

namespace stsexo {

inline constexpr int kSensorCount = 10;
inline constexpr double kSensorPitch = 0.025;                       // m
inline constexpr double kBandLength = kSensorCount * kSensorPitch;  // m
inline constexpr double kBandMid = 0.5 * kBandLength;
/// Distance from the band midpoint to the outermost sensor centre.
inline constexpr double kBandHalfWidth = 0.5 * (kSensorCount - 1) * kSensorPitch;

struct PressureFrame {
  std::array<double, kSensorCount> values{};  ///< N/cm^2, index 0 on the left
  double timestamp = 0.0;

  void validate() const {
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0) throw RangeError("pressure values must be finite and non-negative");
    }
  }

  /// Frame reflected about the band midpoint.
  [[nodiscard]] PressureFrame mirrored() const {
    PressureFrame f = *this;
    std::reverse(f.values.begin(), f.values.end());
    return f;
  }
};

struct VelocityCommand {
  double v = 0.0;      ///< m/s
  double omega = 0.0;  ///< rad/s
  bool operator==(const VelocityCommand&) const = default;
};

struct ControlGains {
  double k1 = 10.0;                 ///< (m/s) per N/cm^2
  double k2 = 12.0;                 ///< (rad/s) per N/cm^2
  double v_max = 1.4;               ///< m/s
  double omega_max = 1.5;           ///< rad/s
  double sensor_max = 0.16;         ///< N/cm^2, readings above are clamped
  double backward_threshold = 0.08; ///< N/cm^2 on both end sensors
  int debounce_frames = 3;
  double rate_limit_v = 1.0;        ///< m/s^2
  double rate_limit_omega = 3.0;    ///< rad/s^2
  double reverse_fraction = 0.25;   ///< reverse speed as a fraction of v_max

  void validate() const {
    for (double x : {k1, k2, v_max, omega_max, sensor_max, backward_threshold, rate_limit_v, rate_limit_omega}) {
      if (!(x > 0.0) || !std::isfinite(x)) throw RangeError("controller gains and limits must be positive");
    }
    if (debounce_frames < 1) throw RangeError("debounce_frames must be at least 1");
    if (!(reverse_fraction >= 0.0 && reverse_fraction <= 1.0)) throw RangeError("reverse_fraction outside [0, 1]");
  }
};

struct CenterOfPressure {
  double rho = kBandMid;  ///< m along the band
  double P = 0.0;         ///< peak pressure, N/cm^2
  double offset = 0.0;    ///< (rho - mid) / half width, in [-1, 1]
};

[[nodiscard]] inline double sensor_position(int k) { return (k + 0.5) * kSensorPitch; }

/**
 * Pressure-weighted centroid of the band and its peak value. The
 * centroid is accumulated over mirror-symmetric sensor pairs so that a
 * reflected frame yields exactly the negated offset.
 */
[[nodiscard]] inline CenterOfPressure compute_cop(const PressureFrame& frame) {
  CenterOfPressure c;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < kSensorCount / 2; ++k) {
    const double left = frame.values[k];
    const double right = frame.values[kSensorCount - 1 - k];
    const double arm = 0.5 * (kSensorCount - 1) - k;  // exact half-integers
    num += (right - left) * arm;
    den += left + right;
    c.P = std::max({c.P, left, right});
  }
  if (den > 0.0) {
    c.offset = num / den / (0.5 * (kSensorCount - 1));
    c.rho = kBandMid + c.offset * kBandHalfWidth;
  }
  return c;
}

/// Both end sensors above the backward threshold in this frame.
[[nodiscard]] inline bool ends_pressed(const PressureFrame& frame, const ControlGains& g) {
  return frame.values.front() > g.backward_threshold && frame.values.back() > g.backward_threshold;
}

/// Forward/turn split of the clamped frame; no backward handling.
[[nodiscard]] inline VelocityCommand forward_command(const PressureFrame& frame, const ControlGains& g) {
  PressureFrame f = frame;
  for (double& v : f.values) v = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, g.sensor_max);
  const auto cop = compute_cop(f);
  if (!(cop.P > 0.0)) return {};
  VelocityCommand c;
  c.v = std::min(g.k1 * cop.P * (1.0 - std::abs(cop.offset)), g.v_max);
  // pressure on the left (negative offset) turns counter-clockwise
  c.omega = std::clamp(-g.k2 * cop.P * cop.offset, -g.omega_max, g.omega_max);
  return c;
}

[[nodiscard]] inline VelocityCommand reverse_command(const ControlGains& g) {
  return {-g.reverse_fraction * g.v_max, 0.0};
}

/// Stateless mapping that treats a single frame with both ends pressed as
/// a confirmed backward gesture (debounce of one frame).
[[nodiscard]] inline VelocityCommand map_to_velocity(const PressureFrame& frame, const ControlGains& g) {
  return ends_pressed(frame, g) ? reverse_command(g) : forward_command(frame, g);
}

/// Stream-owning controller holding the backward-gesture debounce state.
class Controller {
public:
  explicit Controller(ControlGains g = {}) : gains_(g) { gains_.validate(); }

  /// True once both end sensors have been pressed for the debounce count.
  bool detect_backward(const PressureFrame& frame) {
    run_ = ends_pressed(frame, gains_) ? run_ + 1 : 0;
    return run_ >= gains_.debounce_frames;
  }

  VelocityCommand step(const PressureFrame& frame) {
    return detect_backward(frame) ? reverse_command(gains_) : forward_command(frame, gains_);
  }

  void reset() noexcept { run_ = 0; }
  [[nodiscard]] const ControlGains& gains() const noexcept { return gains_; }

private:
  ControlGains gains_;
  int run_ = 0;
};

struct PathPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

/**
 * Integrates a unicycle driven by one command per step of length dt, each
 * step using the exact arc solution. With `limits` set, the applied
 * velocities approach each command at most at the configured rates,
 * starting from rest.
 */
[[nodiscard]] inline std::vector<PathPoint> simulate_drive(const std::vector<VelocityCommand>& commands, double dt,
                                                           const ControlGains* limits = nullptr,
                                                           PathPoint start = {}) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw RangeError("dt must be positive");
  std::vector<PathPoint> path{start};
  path.reserve(commands.size() + 1);
  PathPoint s = start;
  VelocityCommand applied{};
  for (std::size_t i = 0; i < commands.size(); ++i) {
    VelocityCommand c = commands[i];
    if (limits) {
      const double dv = limits->rate_limit_v * dt;
      const double dw = limits->rate_limit_omega * dt;
      c.v = std::clamp(c.v, applied.v - dv, applied.v + dv);
      c.omega = std::clamp(c.omega, applied.omega - dw, applied.omega + dw);
    }
    applied = c;
    const double th = s.heading;
    const double th1 = th + c.omega * dt;
    if (std::abs(c.omega * dt) > 1e-12) {
      const double r = c.v / c.omega;
      s.x += r * (std::sin(th1) - std::sin(th));
      s.y -= r * (std::cos(th1) - std::cos(th));
    } else {
      s.x += c.v * dt * std::cos(th);
      s.y += c.v * dt * std::sin(th);
    }
    s.heading = th1;
    s.t = start.t + static_cast<double>(i + 1) * dt;
    path.push_back(s);
  }
  return path;
}

/// Shoelace area of a path segment treated as a closed polygon; positive
/// when traversed counter-clockwise.
[[nodiscard]] inline double signed_area(const std::vector<PathPoint>& path, std::size_t begin, std::size_t end) {
  double a = 0.0;
  if (end <= begin + 1) return 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const auto& p = path[i];
    const auto& q = path[i + 1 < end ? i + 1 : begin];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

// ---------------------------------------------------------------------------
// Log I/O

[[nodiscard]] inline std::vector<PressureFrame> parse_pressure_log(const csv::Table& t) {
  std::vector<std::ptrdiff_t> idx{t.column("t")};
  for (int k = 0; k < kSensorCount; ++k) idx.push_back(t.column("s" + std::to_string(k)));
  for (auto i : idx) {
    if (i < 0) throw SchemaError("pressure log needs columns t,s0..s9");
  }
  std::vector<PressureFrame> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto line = t.row_lines[r];
    PressureFrame f;
    f.timestamp = csv::to_double(t.rows[r][idx[0]], line);
    for (int k = 0; k < kSensorCount; ++k) {
      f.values[k] = csv::to_double(t.rows[r][idx[k + 1]], line);
      if (!std::isfinite(f.values[k]) || f.values[k] < 0.0) throw ParseError("negative pressure", line);
    }
    if (!out.empty() && !(f.timestamp > out.back().timestamp)) throw ParseError("timestamps must increase", line);
    out.push_back(f);
  }
  return out;
}

[[nodiscard]] inline std::vector<PressureFrame> load_pressure_log(const std::string& path) {
  return parse_pressure_log(csv::read_file(path));
}

inline void write_pressure_log(std::ostream& out, const std::vector<PressureFrame>& frames) {
  out << "t";
  for (int k = 0; k < kSensorCount; ++k) out << ",s" << k;
  out << '\n';
  for (const auto& f : frames) {
    out << csv::fmt(f.timestamp);
    for (double v : f.values) out << ',' << csv::fmt(v);
    out << '\n';
  }
}

inline void write_commands_csv(std::ostream& out, const std::vector<double>& t,
                               const std::vector<VelocityCommand>& cmds) {
  out << "t,v,omega\n";
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    out << csv::fmt(t[i]) << ',' << csv::fmt(cmds[i].v) << ',' << csv::fmt(cmds[i].omega) << '\n';
  }
}

inline void write_path_csv(std::ostream& out, const std::vector<PathPoint>& path) {
  out << "t,x,y,heading\n";
  for (const auto& p : path) {
    out << csv::fmt(p.t) << ',' << csv::fmt(p.x) << ',' << csv::fmt(p.y) << ',' << csv::fmt(p.heading) << '\n';
  }
}

/// Commands for a pressure log; each frame's command is held until the
/// next timestamp (the last one for `hold`).
struct DriveRun {
  std::vector<double> t;
  std::vector<VelocityCommand> commands;
  std::vector<PathPoint> path;
};

[[nodiscard]] inline DriveRun run_pressure_log(const std::vector<PressureFrame>& frames, const ControlGains& g,
                                               double dt, bool rate_limited = true) {
  DriveRun r;
  Controller ctl(g);
  std::vector<VelocityCommand> held;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto c = ctl.step(frames[i]);
    r.t.push_back(frames[i].timestamp);
    r.commands.push_back(c);
    const double until = i + 1 < frames.size() ? frames[i + 1].timestamp : frames[i].timestamp + dt;
    const auto steps = static_cast<std::size_t>(std::llround((until - frames[i].timestamp) / dt));
    held.insert(held.end(), std::max<std::size_t>(steps, 1), c);
  }
  PathPoint start;
  if (!frames.empty()) start.t = frames.front().timestamp;
  r.path = simulate_drive(held, dt, rate_limited ? &g : nullptr, start);
  return r;
}

}  // namespace stsexo
