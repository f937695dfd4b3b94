#pragma once

/// @file config.hpp
/// @brief Run configuration for the command-line tool, read from YAML (or
/// JSON, which the YAML reader accepts as well).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "stsexo/stsexo.hpp"

namespace stsexo::cli {

struct UserGrid {
  double mass_min = 42.0, mass_max = 62.0, mass_step = 2.0;
  double height_min = 1.40, height_max = 1.80, height_step = 0.05;
  int spring_count = 2;

  [[nodiscard]] static std::vector<double> axis(double lo, double hi, double step) {
    std::vector<double> out;
    if (!(step > 0.0)) throw RangeError("grid step must be positive");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int k = 0; k <= n; ++k) out.push_back(lo + k * step);
    return out;
  }

  [[nodiscard]] std::vector<AnthroInput> users() const {
    std::vector<AnthroInput> out;
    for (double h : axis(height_min, height_max, height_step)) {
      for (double m : axis(mass_min, mass_max, mass_step)) {
        std::ostringstream label;
        label << "m" << std::lround(m * 10) << "_h" << std::lround(h * 100);
        out.push_back({m, h, spring_count, label.str()});
      }
    }
    return out;
  }
};

struct SimulationSettings {
  SimMode mode = SimMode::QuasiStatic;
  std::vector<Direction> directions{Direction::SitToStand, Direction::StandToSit};
  bool per_user_placement = false;  ///< search an actuator for every user instead of using the design's
  bool write_traces = true;
};

struct ControllerSettings {
  std::string log;
  double dt = 1e-3;
  bool rate_limited = true;
  ControlGains gains;
};

struct RunConfig {
  std::filesystem::path source;  ///< config file, for resolving relative paths
  std::string text;              ///< raw config bytes, hashed into the metadata
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output = "out";

  std::vector<AnthroInput> users{{70.0, 1.75, 2, "u70"}};
  std::optional<UserGrid> grid;
  std::string segment_table;
  std::string spring_catalog = "../data/gas_springs.csv";
  std::string design;

  ExoModel exo;
  EngagementAngles angles;
  DesignBounds bounds;
  SimOptions sim;

  OptimizerConfig optimizer;
  double sitting_peak_limit = 0.0;
  std::vector<std::string> seed_designs;  ///< design files placed in the initial population
  bool select_with_placement = true;
  int placement_grid = 6;
  int placement_refine = 60;
  std::vector<int> spring_counts{2};

  SimulationSettings simulation;
  ControllerSettings controller;

  [[nodiscard]] std::string resolve(const std::string& p) const {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    if (path.is_absolute()) return p;
    return (source.parent_path() / path).lexically_normal().string();
  }

  [[nodiscard]] SegmentRatioTable table() const {
    return segment_table.empty() ? default_segment_table() : load_segment_table(resolve(segment_table));
  }

  [[nodiscard]] std::vector<AnthroInput> all_users() const { return grid ? grid->users() : users; }

  /// Placement search context for one user.
  [[nodiscard]] PlacementContext placement_context(const BodyModel& body) const {
    PlacementContext pc;
    pc.body = body;
    pc.exo = exo;
    pc.angles = angles;
    pc.bounds = bounds;
    pc.sim = sim;
    pc.spring_counts = spring_counts;
    pc.grid = placement_grid;
    pc.refine_iterations = placement_refine;
    return pc;
  }
};

namespace detail {

template <class T>
void read(const YAML::Node& n, const char* key, T& out) {
  if (n && n[key]) out = n[key].as<T>();
}

inline void read_deg(const YAML::Node& n, const char* key, double& out) {
  if (n && n[key]) out = deg2rad(n[key].as<double>());
}

inline Polygon read_area(const YAML::Node& n, const Polygon& fallback) {
  if (!n) return fallback;
  if (n["vertices"]) {
    Polygon p;
    for (const auto& v : n["vertices"]) p.vertices.emplace_back(v[0].as<double>(), v[1].as<double>());
    if (p.vertices.size() < 3) throw SchemaError("area polygon needs at least 3 vertices");
    return p;
  }
  const auto x = n["x"].as<std::vector<double>>();
  const auto y = n["y"].as<std::vector<double>>();
  if (x.size() != 2 || y.size() != 2) throw SchemaError("area x and y must be [min, max]");
  return Polygon::rectangle(x[0], x[1], y[0], y[1]);
}

inline Direction parse_direction(const std::string& s) {
  if (s == "sit_to_stand") return Direction::SitToStand;
  if (s == "stand_to_sit") return Direction::StandToSit;
  throw SchemaError("unknown direction '" + s + "'");
}

}  // namespace detail

[[nodiscard]] inline RunConfig parse_config(const std::string& text, const std::filesystem::path& source = {}) {
  using detail::read;
  using detail::read_deg;
  RunConfig c;
  c.source = source;
  c.text = text;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  try {
    read(root, "seed", c.seed);
    read(root, "workers", c.workers);
    read(root, "output", c.output);
    read(root, "segment_table", c.segment_table);
    read(root, "spring_catalog", c.spring_catalog);
    read(root, "design", c.design);

    if (const auto u = root["user"]) {
      c.users.clear();
      auto one = [](const YAML::Node& n) {
        AnthroInput a;
        read(n, "mass", a.total_mass);
        read(n, "height", a.height);
        read(n, "springs", a.spring_count);
        read(n, "label", a.label);
        return a;
      };
      if (u.IsSequence()) {
        for (const auto& n : u) c.users.push_back(one(n));
      } else {
        c.users.push_back(one(u));
      }
    }
    if (const auto g = root["grid"]) {
      UserGrid grid;
      if (g["mass"]) {
        const auto m = g["mass"].as<std::vector<double>>();
        if (m.size() != 3) throw SchemaError("grid.mass must be [min, max, step]");
        grid.mass_min = m[0], grid.mass_max = m[1], grid.mass_step = m[2];
      }
      if (g["height"]) {
        const auto h = g["height"].as<std::vector<double>>();
        if (h.size() != 3) throw SchemaError("grid.height must be [min, max, step]");
        grid.height_min = h[0], grid.height_max = h[1], grid.height_step = h[2];
      }
      read(g, "springs", grid.spring_count);
      c.grid = grid;
    }

    if (const auto a = root["angles"]) {
      read_deg(a, "gamma_deg", c.angles.gamma);
      read_deg(a, "beta_deg", c.angles.beta);
      read_deg(a, "delta_deg", c.angles.delta);
      read_deg(a, "q_s_deg", c.angles.q_s);
      read_deg(a, "q_o_deg", c.angles.q_o);
      read_deg(a, "q_f_deg", c.angles.q_f);
    }
    if (const auto e = root["exo"]) {
      auto arr3 = [&](const char* key, std::array<double, 3>& out) {
        if (!e[key]) return;
        const auto v = e[key].as<std::vector<double>>();
        if (v.size() != 3) throw SchemaError(std::string("exo.") + key + " needs 3 values");
        std::copy(v.begin(), v.end(), out.begin());
      };
      auto arr2 = [&](const char* key, std::array<double, 2>& out) {
        if (!e[key]) return;
        const auto v = e[key].as<std::vector<double>>();
        if (v.size() != 2) throw SchemaError(std::string("exo.") + key + " needs 2 values");
        std::copy(v.begin(), v.end(), out.begin());
      };
      arr3("link_masses", c.exo.link_masses);
      arr3("link_lengths", c.exo.link_lengths);
      arr3("link_com_offsets", c.exo.link_com_offsets);
      arr3("link_inertias", c.exo.link_inertias);
      arr2("interface_stiffness", c.exo.interface_stiffness);
      arr2("interface_damping", c.exo.interface_damping);
    }
    if (const auto a = root["areas"]) {
      c.bounds.thigh_area = detail::read_area(a["thigh"], c.bounds.thigh_area);
      c.bounds.base_area = detail::read_area(a["base"], c.bounds.base_area);
    }
    if (const auto b = root["design_bounds"]) {
      if (b["radius"]) {
        const auto r = b["radius"].as<std::vector<double>>();
        c.bounds.r_min = r.at(0), c.bounds.r_max = r.at(1);
      }
      if (b["eta"]) {
        const auto r = b["eta"].as<std::vector<double>>();
        c.bounds.eta_min = r.at(0), c.bounds.eta_max = r.at(1);
      }
    }
    if (const auto o = root["optimizer"]) {
      auto& n = c.optimizer.nsga;
      read(o, "population", n.population);
      read(o, "generations", n.generations);
      read(o, "crossover_prob", n.crossover_prob);
      read(o, "eta_c", n.eta_c);
      read(o, "eta_m", n.eta_m);
      read(o, "mutation_prob", n.mutation_prob);
      read(o, "tolerance", n.tolerance);
      read(o, "sitting_peak_limit", c.sitting_peak_limit);
      read(o, "select_with_placement", c.select_with_placement);
      read(o, "seed_designs", c.seed_designs);
      if (o["equality"]) {
        const auto s = o["equality"].as<std::string>();
        if (s == "repair") c.optimizer.equality = EqualityHandling::Repair;
        else if (s == "penalty") c.optimizer.equality = EqualityHandling::Penalty;
        else throw SchemaError("optimizer.equality must be repair or penalty");
      }
      if (o["hv_reference"]) {
        const auto v = o["hv_reference"].as<std::vector<double>>();
        if (v.size() != 3) throw SchemaError("optimizer.hv_reference needs 3 values");
        std::copy(v.begin(), v.end(), c.optimizer.hv_reference.begin());
      }
      if (o["knee_weights"]) {
        const auto v = o["knee_weights"].as<std::vector<double>>();
        if (v.size() != 3) throw SchemaError("optimizer.knee_weights needs 3 values");
        std::copy(v.begin(), v.end(), c.optimizer.knee_weights.begin());
      }
    }
    if (const auto p = root["placement"]) {
      read(p, "grid", c.placement_grid);
      read(p, "refine_iterations", c.placement_refine);
      read(p, "spring_counts", c.spring_counts);
    }
    if (const auto s = root["simulation"]) {
      if (s["mode"]) {
        const auto m = s["mode"].as<std::string>();
        if (m == "quasi_static") c.simulation.mode = SimMode::QuasiStatic;
        else if (m == "dynamic") c.simulation.mode = SimMode::Dynamic;
        else throw SchemaError("simulation.mode must be quasi_static or dynamic");
      }
      if (s["directions"]) {
        c.simulation.directions.clear();
        for (const auto& d : s["directions"]) c.simulation.directions.push_back(detail::parse_direction(d.as<std::string>()));
      }
      read(s, "per_user_placement", c.simulation.per_user_placement);
      read(s, "write_traces", c.simulation.write_traces);
      read_deg(s, "dq_deg", c.sim.dq);
      read(s, "dt", c.sim.dt);
      read(s, "duration", c.sim.duration);
      read(s, "timeout", c.sim.timeout);
      read(s, "user_effort", c.sim.user_effort);
      read(s, "record_every", c.sim.record_every);
      read(s, "gravity", c.sim.gravity);
    }
    if (const auto k = root["controller"]) {
      read(k, "log", c.controller.log);
      read(k, "dt", c.controller.dt);
      read(k, "rate_limited", c.controller.rate_limited);
      if (const auto g = k["gains"]) {
        auto& G = c.controller.gains;
        read(g, "k1", G.k1);
        read(g, "k2", G.k2);
        read(g, "v_max", G.v_max);
        read(g, "omega_max", G.omega_max);
        read(g, "sensor_max", G.sensor_max);
        read(g, "backward_threshold", G.backward_threshold);
        read(g, "debounce_frames", G.debounce_frames);
        read(g, "rate_limit_v", G.rate_limit_v);
        read(g, "rate_limit_omega", G.rate_limit_omega);
        read(g, "reverse_fraction", G.reverse_fraction);
      }
    }
  } catch (const YAML::Exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }

  c.optimizer.nsga.seed = c.seed;
  c.optimizer.nsga.workers = c.workers;
  c.angles.validate();
  c.exo.validate();
  c.optimizer.nsga.validate();
  c.controller.gains.validate();
  for (const auto& u : c.users) validate(u);
  return c;
}

[[nodiscard]] inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path));
}

/// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace stsexo::cli
