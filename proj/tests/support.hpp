#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "design_io.hpp"
#include "stsexo/stsexo.hpp"

namespace stsexo::test {

inline std::filesystem::path source_dir() { return STSEXO_SOURCE_DIR; }
inline std::string data_path(const std::string& name) { return (source_dir() / "data" / name).string(); }

inline const nlohmann::json& goldens() {
  static const nlohmann::json j = [] {
    std::ifstream in(source_dir() / "tests" / "golden" / "goldens.json");
    return nlohmann::json::parse(in);
  }();
  return j;
}

inline const cli::DesignFile& reference_design() {
  static const cli::DesignFile f = cli::load_design(data_path("reference_design.json"));
  return f;
}

inline const std::vector<GasSpring>& catalog() {
  static const std::vector<GasSpring> c = load_spring_catalog(data_path("gas_springs.csv"));
  return c;
}

inline const GasSpring& reference_spring() { return cli::find_spring(catalog(), reference_design().spring); }

inline PlanarChain<2> unit_two_link() {
  PlanarChain<2> c;
  for (auto& l : c.links) l = {1.0, 1.0, 0.5, 1.0 / 12.0};
  return c;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace stsexo::test
