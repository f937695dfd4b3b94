#pragma once

/// @file design_io.hpp
/// @brief JSON form of a mechanism design with its actuator placement.

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stsexo/stsexo.hpp"

namespace stsexo::cli {

using nlohmann::json;

/// Design file contents: the wire-pulley geometry and, when one was found,
/// the actuator that goes with it.
struct DesignFile {
  DesignVector design;
  std::optional<ActuatorPlacement> placement;
  std::string spring;  ///< catalog name of the spring type
  std::optional<ObjectiveVector> objectives;
  AnthroInput context;  ///< user the design and placement were made for
};

inline json point(const Vec2& p) { return json::array({p.x(), p.y()}); }

inline Vec2 point(const json& j) {
  if (!j.is_array() || j.size() != 2) throw SchemaError("design point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

[[nodiscard]] inline json to_json(const DesignFile& f) {
  const auto& d = f.design;
  json j;
  j["design"] = {{"u", point(d.u)}, {"v", point(d.v)}, {"w", point(d.w)}, {"n", point(d.n)},
                 {"o", point(d.o)}, {"p", point(d.p)}, {"r1", d.r1},      {"r2", d.r2},
                 {"eta", d.eta}};
  if (f.placement) {
    const auto& p = *f.placement;
    j["placement"] = {{"a", point(p.a)},
                      {"b", point(p.b)},
                      {"spring_count", p.spring_count},
                      {"extended_knee_angle_deg", rad2deg(p.extended_knee_angle)},
                      {"spring", f.spring}};
  }
  if (f.objectives) {
    j["objectives"] = {{"j_moment", f.objectives->j_moment},
                       {"j_motion", f.objectives->j_motion},
                       {"j_torque", f.objectives->j_torque}};
  }
  j["context"] = {{"mass", f.context.total_mass},
                  {"height", f.context.height},
                  {"springs", f.context.spring_count},
                  {"label", f.context.label}};
  return j;
}

[[nodiscard]] inline DesignFile design_from_json(const json& j) {
  DesignFile f;
  try {
    const auto& d = j.at("design");
    f.design.u = point(d.at("u"));
    f.design.v = point(d.at("v"));
    f.design.w = point(d.at("w"));
    f.design.n = point(d.at("n"));
    f.design.o = point(d.at("o"));
    f.design.p = point(d.at("p"));
    f.design.r1 = d.at("r1").get<double>();
    f.design.r2 = d.at("r2").get<double>();
    f.design.eta = d.at("eta").get<double>();
    if (j.contains("placement")) {
      const auto& p = j["placement"];
      ActuatorPlacement pl;
      pl.a = point(p.at("a"));
      pl.b = point(p.at("b"));
      pl.spring_count = p.at("spring_count").get<int>();
      pl.extended_knee_angle = deg2rad(p.value("extended_knee_angle_deg", 90.0));
      pl.validate();
      f.placement = pl;
      f.spring = p.at("spring").get<std::string>();
    }
    if (j.contains("objectives")) {
      const auto& o = j["objectives"];
      f.objectives = ObjectiveVector{o.at("j_moment").get<double>(), o.at("j_motion").get<double>(),
                                     o.at("j_torque").get<double>()};
    }
    if (j.contains("context")) {
      const auto& c = j["context"];
      f.context = {c.at("mass").get<double>(), c.at("height").get<double>(), c.at("springs").get<int>(),
                   c.value("label", std::string("context"))};
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("design file: ") + e.what());
  }
  return f;
}

[[nodiscard]] inline DesignFile load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open design " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("design file " + path + ": " + e.what());
  }
  return design_from_json(j);
}

/// Catalog entry by name.
[[nodiscard]] inline const GasSpring& find_spring(const std::vector<GasSpring>& catalog, const std::string& name) {
  for (const auto& s : catalog) {
    if (s.name == name) return s;
  }
  throw SchemaError("spring '" + name + "' not in the catalog");
}

}  // namespace stsexo::cli
