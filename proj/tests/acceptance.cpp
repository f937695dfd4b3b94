// Acceptance checks for the library and the sts_exo tool. Each check prints
// one "PASS <name>: ..." or "FAIL <name>: ..." line; the exit status is
// non-zero when any selected check fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "design_io.hpp"
#include "oracles/closed_form.hpp"
#include "stsexo/stsexo.hpp"

namespace fs = std::filesystem;
using namespace stsexo;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Env {
  fs::path source = STSEXO_SOURCE_DIR;
  std::string cli;
  fs::path work;
};

constexpr double kMomentRef = 419.6938420139609;

std::string fmt(double x, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << x;
  return ss.str();
}

int run_cli(const Env& env, const std::string& args) {
  const std::string cmd = env.cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh(const Env& env, const std::string& name) {
  const fs::path p = env.work / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

cli::DesignFile reference_design(const Env& env) {
  return cli::load_design((env.source / "data" / "reference_design.json").string());
}

GasSpring reference_spring(const Env& env, const cli::DesignFile& df) {
  const auto catalog = load_spring_catalog((env.source / "data" / "gas_springs.csv").string());
  return cli::find_spring(catalog, df.spring);
}

PlanarChain<2> unit_two_link() {
  PlanarChain<2> c;
  for (auto& l : c.links) l = {1.0, 1.0, 0.5, 1.0 / 12.0};
  return c;
}

// ---------------------------------------------------------------------------

Outcome dynamics_matches_double_pendulum(const Env&) {
  const auto chain = unit_two_link();
  const oracle::TwoLink p{1.0, 1.0, 1.0, 0.5, 0.5, 1.0 / 12.0, 1.0 / 12.0};
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ang(-kPi, kPi), rate(-5.0, 5.0);
  double worst = 0.0, worst_grad = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Eigen::Vector2d q(ang(rng), ang(rng)), qd(rate(rng), rate(rng)), qdd(rate(rng), rate(rng));
    const auto tau = inverse_dynamics(chain, q, qd, qdd, kStandardGravity);
    const auto ref = oracle::double_pendulum_torque(p, {q[0], q[1]}, {qd[0], qd[1]}, {qdd[0], qdd[1]}, kStandardGravity);
    for (int i = 0; i < 2; ++i) {
      worst = std::max(worst, std::abs(tau[i] - ref[i]) / std::max(1.0, std::abs(ref[i])));
    }
    const auto g = gravity_torques(chain, q, kStandardGravity);
    for (int i = 0; i < 2; ++i) {
      constexpr double h = 1e-6;
      Eigen::Vector2d qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const double dV = (potential_energy(chain, qp, kStandardGravity) - potential_energy(chain, qm, kStandardGravity)) / (2 * h);
      worst_grad = std::max(worst_grad, std::abs(g[i] - dV) / std::max(1.0, std::abs(dV)));
    }
  }
  return {worst < 1e-8 && worst_grad < 1e-6,
          "max rel err " + fmt(worst) + " (< 1e-8), gravity vs potential gradient " + fmt(worst_grad) + " (< 1e-6)"};
}

Outcome whole_body_com_matches_direct_average(const Env&) {
  const BodyModel body = build_body_model({70.0, 1.75, 2, "u"});
  const HumanChain chain = body.chain();
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    JointVector q;
    for (int i = 0; i < q.size(); ++i) {
      const auto& lim = body.joint_limits[i];
      q[i] = std::uniform_real_distribution<double>(lim.min, lim.max)(rng);
    }
    worst = std::max(worst, (sesc_com(body, q) - oracle::direct_com_average(chain, q)).norm());
  }
  return {worst <= 1e-12, "max deviation " + fmt(worst) + " m over 1000 postures (<= 1e-12)"};
}

Outcome unforced_drop_conserves_energy(const Env&) {
  const auto chain = unit_two_link();
  ChainState<2> s;
  s.q = Eigen::Vector2d(0.3, 0.4);
  s.qd = Eigen::Vector2d::Zero();
  auto energy = [&](const ChainState<2>& x) {
    return kinetic_energy(chain, x.q, x.qd) + potential_energy(chain, x.q, kStandardGravity);
  };
  const double e0 = energy(s);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    s = rk4_step(chain, s, Eigen::Vector2d::Zero(), kStandardGravity, 1e-4);
    worst = std::max(worst, std::abs(energy(s) - e0) / std::abs(e0));
  }
  return {worst < 1e-6, "relative energy drift " + fmt(worst) + " over 1 s (< 1e-6)"};
}

Outcome wire_statics_work_balance_and_direction(const Env& env) {
  const auto df = reference_design(env);
  DesignVector d = df.design;
  d.eta = 1.0;
  const EngagementAngles a;
  const BodyModel body = build_body_model(df.context);
  const ExoModel exo;
  SimOptions opt;
  opt.dq = (a.q_f - a.q_o) / 20000;
  double worst_work = 0.0;
  for (auto dir : {Direction::SitToStand, Direction::StandToSit}) {
    const auto sw = quasi_static_sweep(body, exo, d, nullptr, nullptr, a, dir, opt);
    double hip = 0.0, knee = 0.0;
    for (std::size_t k = 1; k < sw.size(); ++k) {
      const auto& p0 = sw[k - 1];
      const auto& p1 = sw[k];
      hip += 0.5 * (p0.tau3 + p1.tau3) * (p1.q3 - p0.q3);
      knee += 0.5 * ((p0.knee.Mo - p0.tau2) + (p1.knee.Mo - p1.tau2)) * (p1.q2 - p0.q2);
    }
    worst_work = std::max(worst_work, std::abs(hip - knee) / std::abs(hip));
  }

  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> angle(a.q_o, a.q_f), load(-300.0, 300.0);
  int violations = 0;
  for (int n = 0; n < 500; ++n) {
    const double q2 = angle(rng), tau2 = load(rng);
    double tau3 = load(rng);
    if (tau3 == 0.0) tau3 = 1.0;
    bool p1_taut = false, p2_taut = false;
    try {
      p1_taut = knee_moment_standing(d, a, q2, tau2, tau3).tensions.T_i > 0.0;
    } catch (const SlackWireError&) {
    }
    try {
      p2_taut = knee_moment_sitting(d, a, q2, tau2, tau3).tensions.T_u > 0.0;
    } catch (const SlackWireError&) {
    }
    // a forward hip load (negative) is the standing direction
    if (p1_taut != (tau3 < 0.0) || p2_taut != (tau3 > 0.0)) ++violations;
  }
  return {worst_work < 1e-6 && violations == 0, "hip vs knee work rel err " + fmt(worst_work) +
                                                    " (< 1e-6), direction violations " +
                                                    std::to_string(violations) + "/500"};
}

Outcome reference_coupling_linearity(const Env& env) {
  NormConstants n;
  n.moment_ref = kMomentRef;
  const auto t = motion_terms(reference_design(env).design, EngagementAngles{}, n);
  return {t.standing <= 0.15 && t.sitting <= 0.15,
          "standing " + fmt(t.standing) + ", sitting " + fmt(t.sitting) + " (<= 0.15)"};
}

Outcome heavy_user_sitting_peak_and_ordering(const Env& env) {
  const auto df = reference_design(env);
  const BodyModel body = build_body_model({88.0, 1.75, 3, "u88"});
  const ExoModel exo;
  const EngagementAngles a;
  SimOptions opt;
  opt.moment_ref = kMomentRef;
  double peak_st = -1e300, peak_si = -1e300;
  for (const auto& p : quasi_static_sweep(body, exo, df.design, nullptr, nullptr, a, Direction::SitToStand, opt)) {
    peak_st = std::max(peak_st, p.knee.Mo / kMomentRef);
  }
  for (const auto& p : quasi_static_sweep(body, exo, df.design, nullptr, nullptr, a, Direction::StandToSit, opt)) {
    peak_si = std::max(peak_si, p.knee.Mo / kMomentRef);
  }
  return {peak_si <= 0.86 && peak_st < peak_si,
          "sitting peak " + fmt(peak_si) + " (<= 0.86), standing peak " + fmt(peak_st) + " (< sitting)"};
}

Outcome com_excursion_band_over_user_grid(const Env& env) {
  const fs::path out = fresh(env, "grid");
  const int rc = run_cli(env, "simulate --config " + (env.source / "configs" / "grid.yaml").string() + " --out " +
                                  out.string());
  if (rc != 0) return {false, "sts_exo simulate exited " + std::to_string(rc)};
  const auto f = json::parse(slurp(out / "feasibility.json"));
  int feasible = 0, outside = 0;
  double lo = 1e300, hi = -1e300;
  for (const auto& u : f["users"]) {
    if (!u.value("feasible", false)) continue;
    ++feasible;
    const double cm = u["com_excursion_cm"]["sit_to_stand"].get<double>();
    lo = std::min(lo, cm);
    hi = std::max(hi, cm);
    if (cm < 3.0 || cm > 9.0) ++outside;
  }
  const bool contiguous = f["summary"].value("contiguous", false);
  return {feasible > 0 && outside == 0 && contiguous,
          std::to_string(feasible) + "/" + std::to_string(f["users"].size()) + " cells feasible, excursion " +
              fmt(lo) + "-" + fmt(hi) + " cm (within [3, 9]), contiguous " + (contiguous ? "yes" : "no")};
}

Outcome spring_count_feasibility_ordering(const Env& env) {
  const auto df = reference_design(env);
  const auto spring = reference_spring(env, df);
  const ExoModel exo;
  const EngagementAngles a;
  SimOptions opt;
  opt.moment_ref = kMomentRef;
  std::vector<int> two, three;
  for (int mass = 40; mass <= 100; ++mass) {
    for (int springs : {2, 3}) {
      ActuatorPlacement pl = *df.placement;
      pl.spring_count = springs;
      const BodyModel body = build_body_model({static_cast<double>(mass), 1.75, springs, "u"});
      if (feasibility_report(body, exo, df.design, pl, spring, a, opt).feasible) {
        (springs == 2 ? two : three).push_back(mass);
      }
    }
  }
  bool subset = true;
  for (int m : two) subset = subset && std::find(three.begin(), three.end(), m) != three.end();
  const bool higher = !three.empty() && (two.empty() || three.back() > two.back());
  auto range = [](const std::vector<int>& v) {
    return v.empty() ? std::string("none") : std::to_string(v.front()) + "-" + std::to_string(v.back()) + " kg";
  };
  return {subset && higher, "feasible masses at 1.75 m: 2 springs " + range(two) + ", 3 springs " + range(three) +
                                "; 2-spring users also feasible with 3: " + (subset ? "yes" : "no") +
                                ", 3-spring range extends higher: " + (higher ? "yes" : "no")};
}

struct Zdt1 {
  [[nodiscard]] std::size_t num_variables() const { return 30; }
  [[nodiscard]] std::size_t num_objectives() const { return 2; }
  [[nodiscard]] std::vector<double> lower_bounds() const { return std::vector<double>(30, 0.0); }
  [[nodiscard]] std::vector<double> upper_bounds() const { return std::vector<double>(30, 1.0); }
  [[nodiscard]] nsga2::Evaluation evaluate(const std::vector<double>& x) const {
    double g = 0.0;
    for (std::size_t i = 1; i < 30; ++i) g += x[i];
    g = 1.0 + 9.0 * g / 29.0;
    return {{x[0], g * (1.0 - std::sqrt(x[0] / g))}, 0.0};
  }
};

Outcome optimizer_zdt1_hypervolume(const Env&) {
  nsga2::Config cfg;
  cfg.population = 100;
  cfg.generations = 250;
  cfg.seed = 1;
  const auto res = nsga2::run(Zdt1{}, cfg);
  std::vector<std::vector<double>> pts;
  for (const auto& i : res.front) pts.push_back(i.f);
  const double hv = hypervolume(pts, {1.1, 1.1});
  const double exact = 1.1 * 1.1 - 1.0 / 3.0;
  const double err = std::abs(hv - exact) / exact;
  return {err <= 0.02, "hypervolume " + fmt(hv, 6) + " vs analytic " + fmt(exact, 6) + ", rel err " + fmt(err) +
                           " (<= 0.02)"};
}

Outcome pareto_front_moment_motion_tradeoff(const Env& env) {
  const fs::path out = fresh(env, "reference_opt");
  const int rc = run_cli(env, "optimize --config " + (env.source / "configs" / "reference.yaml").string() +
                                  " --out " + out.string());
  if (rc != 0) return {false, "sts_exo optimize exited " + std::to_string(rc)};
  const auto table = csv::read_file((out / "pareto.csv").string());
  std::vector<double> jm, jl;
  for (const auto& row : table.rows) {
    jm.push_back(std::stod(row[table.column("j_moment")]));
    jl.push_back(std::stod(row[table.column("j_motion")]));
  }
  const double r = pearson(jm, jl);
  return {jm.size() >= 20 && r > 0.3,
          std::to_string(jm.size()) + " front members (>= 20), Pearson r(j_moment, j_motion) " + fmt(r) + " (> 0.3)"};
}

Outcome drive_controller_properties(const Env&) {
  std::mt19937_64 rng(111);
  std::uniform_real_distribution<double> pos(0.01, 50.0), frac(0.0, 1.0);
  int nonzero = 0;
  for (int n = 0; n < 10000; ++n) {
    ControlGains g;
    g.k1 = pos(rng), g.k2 = pos(rng), g.v_max = pos(rng), g.omega_max = pos(rng);
    g.sensor_max = pos(rng), g.backward_threshold = pos(rng), g.reverse_fraction = frac(rng);
    if (!(map_to_velocity(PressureFrame{}, g) == VelocityCommand{})) ++nonzero;
  }

  const ControlGains g;
  std::uniform_real_distribution<double> pressure(0.0, 0.3);
  int mirror = 0, saturation = 0;
  for (int n = 0; n < 10000; ++n) {
    PressureFrame f;
    for (double& v : f.values) v = frac(rng) < 0.3 ? 0.0 : pressure(rng);
    const auto c = forward_command(f, g), m = forward_command(f.mirrored(), g);
    if (c.v != m.v || c.omega != -m.omega) ++mirror;
    PressureFrame wild;
    for (double& v : wild.values) v = frac(rng) < 0.1 ? 1e6 * frac(rng) : pressure(rng);
    const auto w = map_to_velocity(wild, g);
    if (w.v > g.v_max || w.v < -g.reverse_fraction * g.v_max || std::abs(w.omega) > g.omega_max) ++saturation;
  }

  PressureFrame left;
  left.values = {0, .02, .05, .08, .06, .03, .01, 0, 0, 0};
  const auto c = map_to_velocity(left, g);
  constexpr int steps = 20000;
  const double dt = 2.0 * kPi / c.omega / steps;
  const auto path = simulate_drive(std::vector<VelocityCommand>(steps, c), dt);
  const double gap = std::hypot(path.back().x, path.back().y);

  const bool ok = nonzero == 0 && mirror == 0 && saturation == 0 && gap < 1e-6;
  return {ok, "zero-input violations " + std::to_string(nonzero) + "/10000, mirror mismatches " +
                  std::to_string(mirror) + ", saturation breaches " + std::to_string(saturation) +
                  ", circle closure gap " + fmt(gap) + " m (< 1e-6)"};
}

/// Relative path -> bytes for every file under `dir`.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

Outcome cli_outputs_deterministic(const Env& env) {
  struct Job {
    std::string command, config;
  };
  const std::vector<Job> jobs{{"optimize", "smoke.yaml"}, {"simulate", "simulate_u70.yaml"}};
  std::ostringstream detail;
  bool ok = true;
  for (const auto& job : jobs) {
    std::vector<std::map<std::string, std::string>> snaps;
    int idx = 0;
    for (int workers : {1, 1, 8}) {
      const fs::path out = fresh(env, "determinism_" + job.command + "_" + std::to_string(idx++));
      const int rc = run_cli(env, job.command + " --config " + (env.source / "configs" / job.config).string() +
                                      " --out " + out.string() + " --workers " + std::to_string(workers));
      if (rc != 0) {
        ok = false;
        detail << job.command << " exited " << rc << "; ";
        break;
      }
      snaps.push_back(snapshot(out));
    }
    if (snaps.size() != 3) continue;
    const bool same = !snaps[0].empty() && snaps[0] == snaps[1] && snaps[0] == snaps[2];
    ok = ok && same;
    detail << job.command << " " << snaps[0].size() << " files " << (same ? "identical" : "differ")
           << " across repeat and 1 vs 8 workers; ";
  }
  std::string d = detail.str();
  if (d.size() >= 2) d.resize(d.size() - 2);
  return {ok, d};
}

struct Check {
  const char* name;
  std::function<Outcome(const Env&)> fn;
};

const std::vector<Check>& checks() {
  static const std::vector<Check> all{
      {"dynamics_matches_double_pendulum", dynamics_matches_double_pendulum},
      {"whole_body_com_matches_direct_average", whole_body_com_matches_direct_average},
      {"unforced_drop_conserves_energy", unforced_drop_conserves_energy},
      {"wire_statics_work_balance_and_direction", wire_statics_work_balance_and_direction},
      {"reference_coupling_linearity", reference_coupling_linearity},
      {"heavy_user_sitting_peak_and_ordering", heavy_user_sitting_peak_and_ordering},
      {"com_excursion_band_over_user_grid", com_excursion_band_over_user_grid},
      {"spring_count_feasibility_ordering", spring_count_feasibility_ordering},
      {"optimizer_zdt1_hypervolume", optimizer_zdt1_hypervolume},
      {"pareto_front_moment_motion_tradeoff", pareto_front_moment_motion_tradeoff},
      {"drive_controller_properties", drive_controller_properties},
      {"cli_outputs_deterministic", cli_outputs_deterministic},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Acceptance checks");
  std::vector<int> only;
  Env env;
  std::string work = (fs::temp_directory_path() / "stsexo_acceptance").string();
  env.cli = STSEXO_CLI;
  app.add_option("--only", only, "Run only these checks (1-based)");
  app.add_option("--cli", env.cli, "Path to the sts_exo executable");
  app.add_option("--work", work, "Scratch directory for tool outputs");
  CLI11_PARSE(app, argc, argv);
  env.work = work;
  fs::create_directories(env.work);

  bool all_pass = true;
  const auto& list = checks();
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = list[i].fn(env);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << list[i].name << ": " << o.detail << " [" << fmt(secs, 3) << " s]"
              << std::endl;
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
