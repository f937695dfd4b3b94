// Quasi-static and dynamic sit-to-stand of the reference design for a 70 kg
// user, printing a coarse table of the knee load and actuator torque.

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "stsexo/stsexo.hpp"

using namespace stsexo;

namespace {

Vec2 point(const nlohmann::json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

}  // namespace

int main() {
  std::ifstream in(STSEXO_DATA_DIR "/reference_design.json");
  const auto j = nlohmann::json::parse(in);
  DesignVector d;
  d.u = point(j["design"]["u"]);
  d.v = point(j["design"]["v"]);
  d.w = point(j["design"]["w"]);
  d.n = point(j["design"]["n"]);
  d.o = point(j["design"]["o"]);
  d.p = point(j["design"]["p"]);
  d.r1 = j["design"]["r1"];
  d.r2 = j["design"]["r2"];
  d.eta = j["design"]["eta"];
  ActuatorPlacement pl;
  pl.a = point(j["placement"]["a"]);
  pl.b = point(j["placement"]["b"]);
  pl.spring_count = j["placement"]["spring_count"];
  pl.extended_knee_angle = deg2rad(j["placement"]["extended_knee_angle_deg"].get<double>());
  GasSpring spring;
  for (const auto& s : load_spring_catalog(STSEXO_DATA_DIR "/gas_springs.csv")) {
    if (s.name == j["placement"]["spring"]) spring = s;
  }

  const BodyModel body = build_body_model({70.0, 1.75, 2, "demo"});
  ExoModel exo;
  const EngagementAngles angles;
  SimOptions opt;

  const auto qs = simulate_transition(body, exo, d, pl, spring, angles, Direction::SitToStand, SimMode::QuasiStatic, opt);
  std::printf("quasi-static sit-to-stand (moment_ref %.1f N m)\n", qs.moment_ref);
  std::printf("%8s %8s %8s %10s %10s\n", "q2 [deg]", "q3 [deg]", "Mo/Mr", "tau_a [Nm]", "com_x [m]");
  for (std::size_t i = 0; i < qs.samples.size(); i += 20) {
    const auto& s = qs.samples[i];
    std::printf("%8.1f %8.1f %8.3f %10.1f %10.3f\n", rad2deg(s.q2), rad2deg(s.q3), s.Mo_norm, s.tau_a, s.com.x());
  }

  exo.interface_damping = {30.0, 30.0};
  opt.user_effort = 10.0;
  opt.moment_ref = qs.moment_ref;
  try {
    const auto dyn = simulate_transition(body, exo, d, pl, spring, angles, Direction::SitToStand, SimMode::Dynamic, opt);
    std::printf("dynamic sit-to-stand: %.2f s, max deviation from quasi-static %.3f\n", dyn.samples.back().t,
                quasi_static_deviation(dyn, body, exo, d, angles, opt));
  } catch (const StallError& e) {
    std::printf("dynamic sit-to-stand stalled at %.1f deg: %s\n", rad2deg(e.angle()), e.what());
  }
  return 0;
}
