// sts_exo: command-line front end for design search, transition
// simulation, load sweeps, drive-controller replay and design reports.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "design_io.hpp"

namespace fs = std::filesystem;
using namespace stsexo;
using namespace stsexo::cli;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNoDesign = 2, kParse = 3 };

struct Options {
  std::string config;
  std::string out;
  std::string design;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

class Writer {
public:
  Writer(fs::path dir, const RunConfig& cfg, std::string command)
      : dir_(std::move(dir)), cfg_(cfg), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  /// Writes `content` to `name` plus a `name.meta.json` sidecar.
  void write(const std::string& name, const std::string& content) const {
    write_raw(name, content);
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a(cfg_.text);
    json meta = {{"file", name},
                 {"command", command_},
                 {"config_hash", "fnv1a64:" + hash.str()},
                 {"seed", cfg_.seed},
                 {"version", kVersion}};
    write_raw(name + ".meta.json", meta.dump(2) + "\n");
    spdlog::info("wrote {}", (dir_ / name).string());
  }

private:
  void write_raw(const std::string& name, const std::string& content) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw SchemaError("cannot write " + (dir_ / name).string());
    f << content;
  }

  fs::path dir_;
  const RunConfig& cfg_;
  std::string command_;
};

std::string num(double v) { return csv::fmt(v); }

json objectives_json(const ObjectiveVector& o) {
  return {{"j_moment", o.j_moment}, {"j_motion", o.j_motion}, {"j_torque", o.j_torque}};
}

EvalContext eval_context(const RunConfig& cfg, const BodyModel& body) {
  EvalContext ctx;
  ctx.body = body;
  ctx.exo = cfg.exo;
  ctx.angles = cfg.angles;
  ctx.bounds = cfg.bounds;
  ctx.sim = cfg.sim;
  ctx.norms = make_norms(cfg.exo, cfg.angles, cfg.sim);
  ctx.tolerance = cfg.optimizer.nsga.tolerance;
  ctx.sitting_peak_limit = cfg.sitting_peak_limit;
  return ctx;
}

DesignFile resolve_design(const RunConfig& cfg, const Options& opt) {
  if (!opt.design.empty()) return load_design(opt.design);
  if (!cfg.design.empty()) return load_design(cfg.resolve(cfg.design));
  throw SchemaError("no design given (use --design or the config's design key)");
}

// ---------------------------------------------------------------------------

int cmd_optimize(const RunConfig& cfg, const Writer& out) {
  if (cfg.users.empty()) throw SchemaError("optimize needs a context user");
  const auto table = cfg.table();
  const BodyModel body = build_body_model(cfg.users.front(), table);
  const EvalContext ctx = eval_context(cfg, body);
  spdlog::info("optimizing for {} ({} kg, {} m), population {}, {} generations", cfg.users.front().label,
               cfg.users.front().total_mass, cfg.users.front().height, cfg.optimizer.nsga.population,
               cfg.optimizer.nsga.generations);
  OptimizerConfig oc = cfg.optimizer;
  for (const auto& path : cfg.seed_designs) {
    const auto a = load_design(cfg.resolve(path)).design.to_array();
    oc.nsga.initial.emplace_back(a.begin(), a.end());
  }
  OptimizationResult res;
  try {
    res = nsga2_run(oc, ctx);
  } catch (const NoFeasibleDesign& e) {
    spdlog::error("{} (best violation {})", e.what(), e.best_violation());
    return kNoDesign;
  }
  const auto& members = res.front.members();

  DesignChoice choice;
  std::string spring_name;
  if (cfg.select_with_placement) {
    const auto catalog = load_spring_catalog(cfg.resolve(cfg.spring_catalog));
    choice = choose_design(res.front, cfg.optimizer.knee_weights, catalog, cfg.placement_context(body), cfg.workers);
    if (choice.placement) spring_name = catalog[choice.placement->spring_index].name;
    spdlog::info("{} of {} front members admit an actuator", choice.placeable, members.size());
  } else {
    choice.index = pick_knee_point(res.front, cfg.optimizer.knee_weights);
  }

  std::ostringstream pareto;
  pareto << "gen,j_moment,j_motion,j_torque,violation";
  for (const char* n : DesignVector::kNames) pareto << ',' << n;
  pareto << '\n';
  std::ostringstream plot;
  plot << "j_moment,j_motion,j_torque,chosen\n";
  std::vector<double> jm, jl;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& c = members[i];
    pareto << res.front.generation << ',' << num(c.objectives.j_moment) << ',' << num(c.objectives.j_motion) << ','
           << num(c.objectives.j_torque) << ',' << num(c.constraint_violation);
    for (double x : c.design.to_array()) pareto << ',' << num(x);
    pareto << '\n';
    plot << num(c.objectives.j_moment) << ',' << num(c.objectives.j_motion) << ',' << num(c.objectives.j_torque)
         << ',' << (i == choice.index ? 1 : 0) << '\n';
    jm.push_back(c.objectives.j_moment);
    jl.push_back(c.objectives.j_motion);
  }
  out.write("pareto.csv", pareto.str());
  out.write("pareto_plotdata.csv", plot.str());

  const std::vector<double> ref(cfg.optimizer.hv_reference.begin(), cfg.optimizer.hv_reference.end());
  json best = json::array();
  for (const auto& b : res.best_objective_history) best.push_back({b[0], b[1], b[2]});
  json summary = {{"generations", res.front.generation},
                  {"evaluations", res.evaluations},
                  {"front_size", members.size()},
                  {"hypervolume_reference", ref},
                  {"hypervolume", res.front.hypervolume(ref)},
                  {"hypervolume_history", res.hypervolume_history},
                  {"best_objective_history", best},
                  {"pearson_moment_motion", pearson(jm, jl)},
                  {"moment_ref", ctx.norms.moment_ref},
                  {"chosen_index", choice.index},
                  {"placeable_members", choice.placeable}};
  out.write("pareto_summary.json", summary.dump(2) + "\n");

  DesignFile chosen;
  chosen.design = members[choice.index].design;
  chosen.objectives = members[choice.index].objectives;
  chosen.context = cfg.users.front();
  if (choice.placement) {
    chosen.placement = choice.placement->placement;
    chosen.spring = spring_name;
  }
  out.write("chosen.json", to_json(chosen).dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------

struct UserOutcome {
  AnthroInput user;
  json record;
  std::vector<std::pair<std::string, std::string>> traces;  // file name, content
  bool feasible = false;
  std::optional<ComExcursion> excursion;
};

UserOutcome simulate_user(const RunConfig& cfg, const DesignFile& df, const std::vector<GasSpring>& catalog,
                          const SegmentRatioTable& table, const AnthroInput& user) {
  UserOutcome o;
  o.user = user;
  json& r = o.record;
  r = {{"label", user.label}, {"mass", user.total_mass}, {"height", user.height}, {"springs", user.spring_count}};
  const BodyModel body = build_body_model(user, table);

  std::optional<ActuatorPlacement> pl;
  const GasSpring* spring = nullptr;
  if (cfg.simulation.per_user_placement) {
    PlacementContext pc = cfg.placement_context(body);
    pc.spring_counts = {user.spring_count};
    try {
      const auto pr = place_actuator(df.design, catalog, pc);
      pl = pr.placement;
      spring = &catalog[pr.spring_index];
    } catch (const NoFeasibleActuator& e) {
      r["feasible"] = false;
      r["reason"] = e.what();
      return o;
    }
  } else if (df.placement) {
    pl = df.placement;
    pl->spring_count = user.spring_count;
    spring = &find_spring(catalog, df.spring);
  } else {
    throw SchemaError("design has no actuator placement; enable simulation.per_user_placement");
  }
  r["spring"] = spring->name;
  r["placement"] = {{"a", point(pl->a)}, {"b", point(pl->b)}, {"spring_count", pl->spring_count}};

  const auto v = feasibility_report(body, cfg.exo, df.design, *pl, *spring, cfg.angles, cfg.sim);
  o.feasible = v.feasible;
  r["feasible"] = v.feasible;
  r["standing_ok"] = v.standing_ok;
  r["sitting_ok"] = v.sitting_ok;
  r["stroke_ok"] = v.stroke_ok;
  r["coupling_ok"] = v.coupling_ok;
  r["standing_margin"] = v.standing_margin;
  r["sitting_margin"] = v.sitting_margin;
  if (v.stall_angle) r["stall_angle_deg"] = rad2deg(*v.stall_angle);
  if (!v.reason.empty()) r["reason"] = v.reason;

  try {
    const auto ex = com_excursion(body, cfg.exo, *pl, *spring, cfg.angles, cfg.sim);
    o.excursion = ex;
    r["com_excursion_cm"] = {{"sit_to_stand", 100.0 * ex.sit_to_stand}, {"stand_to_sit", 100.0 * ex.stand_to_sit}};
  } catch (const Error& e) {
    r["com_excursion_error"] = e.what();
  }

  json transitions = json::object();
  for (Direction dir : cfg.simulation.directions) {
    const std::string dname(direction_name(dir));
    try {
      const auto tr = simulate_transition(body, cfg.exo, df.design, *pl, *spring, cfg.angles, dir,
                                          cfg.simulation.mode, cfg.sim);
      transitions[dname] = {{"status", "completed"},
                            {"samples", tr.samples.size()},
                            {"engagement", circuit_name(tr.engagement.circuit)},
                            {"engagement_q2_deg", rad2deg(tr.engagement.q2)},
                            {"engagement_q3_deg", rad2deg(tr.engagement.q3)}};
      if (!tr.samples.empty()) transitions[dname]["duration_s"] = tr.samples.back().t;
      if (tr.slack_onset) transitions[dname]["wire_slack_from_q2_deg"] = rad2deg(*tr.slack_onset);
      if (cfg.simulation.write_traces) {
        std::ostringstream ss;
        write_trace_csv(ss, tr);
        o.traces.emplace_back("trace_" + user.label + "_" + dname + ".csv", ss.str());
      }
    } catch (const StallError& e) {
      transitions[dname] = {{"status", "stalled"}, {"stall_angle_deg", rad2deg(e.angle())}, {"reason", e.what()}};
    } catch (const CouplingInfeasible& e) {
      transitions[dname] = {{"status", "coupling_infeasible"}, {"reason", e.what()}};
    } catch (const SlackWireError& e) {
      transitions[dname] = {{"status", "wire_slack"}, {"reason", e.what()}};
    }
  }
  r["transitions"] = transitions;
  return o;
}

int cmd_simulate(const RunConfig& cfg, const Options& opt, const Writer& out) {
  const DesignFile df = resolve_design(cfg, opt);
  const auto catalog = load_spring_catalog(cfg.resolve(cfg.spring_catalog));
  const auto table = cfg.table();
  const auto users = cfg.all_users();
  std::vector<UserOutcome> results(users.size());
  nsga2::parallel_for(users.size(), cfg.workers,
                      [&](std::size_t i) { results[i] = simulate_user(cfg, df, catalog, table, users[i]); });

  json list = json::array();
  std::size_t feasible = 0;
  for (const auto& r : results) {
    list.push_back(r.record);
    feasible += r.feasible ? 1 : 0;
    for (const auto& [name, content] : r.traces) out.write(name, content);
  }
  json summary = {{"users", users.size()}, {"feasible", feasible}};

  if (cfg.grid) {
    const auto masses = UserGrid::axis(cfg.grid->mass_min, cfg.grid->mass_max, cfg.grid->mass_step);
    const auto heights = UserGrid::axis(cfg.grid->height_min, cfg.grid->height_max, cfg.grid->height_step);
    std::vector<std::vector<bool>> cells(heights.size(), std::vector<bool>(masses.size(), false));
    std::ostringstream table_csv;
    table_csv << "mass,height,feasible,sit_to_stand_cm,stand_to_sit_cm\n";
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      cells[i / masses.size()][i % masses.size()] = r.feasible;
      table_csv << num(r.user.total_mass) << ',' << num(r.user.height) << ',' << (r.feasible ? 1 : 0) << ',';
      if (r.feasible && r.excursion) {
        table_csv << num(100.0 * r.excursion->sit_to_stand) << ',' << num(100.0 * r.excursion->stand_to_sit);
        lo = std::min(lo, 100.0 * r.excursion->sit_to_stand);
        hi = std::max(hi, 100.0 * r.excursion->sit_to_stand);
      } else {
        table_csv << ',';
      }
      table_csv << '\n';
    }
    out.write("com_excursion.csv", table_csv.str());
    summary["contiguous"] = feasible_region_contiguous(cells);
    if (feasible > 0) summary["sit_to_stand_cm_range"] = {lo, hi};
  }
  out.write("feasibility.json", json({{"summary", summary}, {"users", list}}).dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg, const Options& opt, const Writer& out) {
  const DesignFile df = resolve_design(cfg, opt);
  std::optional<GasSpring> spring;
  if (df.placement) spring = find_spring(load_spring_catalog(cfg.resolve(cfg.spring_catalog)), df.spring);
  const auto table = cfg.table();
  const double Mr = make_norms(cfg.exo, cfg.angles, cfg.sim).moment_ref;
  json status = json::array();
  for (const auto& user : cfg.all_users()) {
    const BodyModel body = build_body_model(user, table);
    std::optional<ActuatorPlacement> pl = df.placement;
    if (pl) pl->spring_count = user.spring_count;
    std::ostringstream ss;
    ss << "direction,q2,q3,tau2,tau3,Mo,Mo_norm,tau_a\n";
    json st = {{"label", user.label}};
    try {
      for (Direction dir : {Direction::SitToStand, Direction::StandToSit}) {
        const auto sw = quasi_static_sweep(body, cfg.exo, df.design, pl ? &*pl : nullptr, spring ? &*spring : nullptr,
                                           cfg.angles, dir, cfg.sim);
        double peak = 0.0;
        for (const auto& p : sw) {
          ss << direction_name(dir) << ',' << num(p.q2) << ',' << num(p.q3) << ',' << num(p.tau2) << ','
             << num(p.tau3) << ',' << num(p.knee.Mo) << ',' << num(p.knee.Mo / Mr) << ',' << num(p.tau_a) << '\n';
          peak = std::max(peak, p.knee.Mo / Mr);
        }
        st[std::string(direction_name(dir)) + "_peak_norm"] = peak;
      }
      st["status"] = "ok";
      out.write("sweep_" + user.label + ".csv", ss.str());
    } catch (const Error& e) {
      st["status"] = "failed";
      st["reason"] = e.what();
    }
    status.push_back(st);
  }
  out.write("sweep_summary.json", json({{"moment_ref", Mr}, {"users", status}}).dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_controller_sim(const RunConfig& cfg, const Writer& out) {
  if (cfg.controller.log.empty()) throw SchemaError("controller.log is not set");
  const auto frames = load_pressure_log(cfg.resolve(cfg.controller.log));
  const auto run = run_pressure_log(frames, cfg.controller.gains, cfg.controller.dt, cfg.controller.rate_limited);
  std::ostringstream cmds, path;
  write_commands_csv(cmds, run.t, run.commands);
  write_path_csv(path, run.path);
  out.write("commands.csv", cmds.str());
  out.write("path.csv", path.str());
  return kOk;
}

// ---------------------------------------------------------------------------

json mass_range(const RunConfig& cfg, const DesignFile& df, const GasSpring& s, const SegmentRatioTable& table,
                double height, int springs) {
  json masses = json::array();
  ActuatorPlacement pl = *df.placement;
  pl.spring_count = springs;
  for (int m = static_cast<int>(kMinSupportedMass); m <= static_cast<int>(kMaxSupportedMass); ++m) {
    const BodyModel body = build_body_model({double(m), height, springs, "scan"}, table);
    if (feasibility_report(body, cfg.exo, df.design, pl, s, cfg.angles, cfg.sim).feasible) masses.push_back(m);
  }
  return masses;
}

int cmd_report(const RunConfig& cfg, const Options& opt, const Writer& out) {
  const DesignFile df = resolve_design(cfg, opt);
  const auto table = cfg.table();
  const NormConstants norms = make_norms(cfg.exo, cfg.angles, cfg.sim);
  const auto lin = motion_terms(df.design, cfg.angles, norms, cfg.sim.hip_limit);
  json rep = {{"moment_ref", norms.moment_ref},
              {"motion_linearity", {{"sit_to_stand", lin.standing}, {"stand_to_sit", lin.sitting}}},
              {"sync_residuals",
               {{"standing", standing_sync_residual(df.design, cfg.angles)},
                {"sitting", sitting_sync_residual(df.design, cfg.angles)}}}};
  std::optional<GasSpring> spring;
  if (df.placement) spring = find_spring(load_spring_catalog(cfg.resolve(cfg.spring_catalog)), df.spring);
  json users = json::array();
  for (const auto& user : cfg.all_users()) {
    const BodyModel body = build_body_model(user, table);
    EvalContext ctx = eval_context(cfg, body);
    json u = {{"label", user.label}, {"mass", user.total_mass}, {"height", user.height}};
    const auto ev = evaluate_sweeps(df.design, ctx);
    double pst = 0.0, psi = 0.0;
    for (const auto& p : ev.standing) pst = std::max(pst, p.knee.Mo / norms.moment_ref);
    for (const auto& p : ev.sitting) psi = std::max(psi, p.knee.Mo / norms.moment_ref);
    u["peak_norm"] = {{"sit_to_stand", pst}, {"stand_to_sit", psi}};
    const Candidate c = evaluate_candidate(df.design, ctx);
    u["feasible_design"] = c.feasible;
    if (c.feasible) u["objectives"] = objectives_json(c.objectives);
    if (df.placement) {
      ActuatorPlacement pl = *df.placement;
      pl.spring_count = user.spring_count;
      const auto tt = torque_terms(df.design, pl, *spring, body, cfg.exo, cfg.angles, norms, cfg.sim);
      u["torque_linearity"] = {{"sit_to_stand", tt.standing}, {"stand_to_sit", tt.sitting}};
      u["actuator_feasible"] = feasibility_report(body, cfg.exo, df.design, pl, *spring, cfg.angles, cfg.sim).feasible;
      u["feasible_masses"] = {{"two_springs", mass_range(cfg, df, *spring, table, user.height, 2)},
                              {"three_springs", mass_range(cfg, df, *spring, table, user.height, 3)}};
    }
    users.push_back(u);
  }
  rep["users"] = users;
  out.write("report.json", rep.dump(2) + "\n");
  return kOk;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("sts_exo");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("STS_EXO_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Sit-to-stand exoskeleton design and simulation toolkit"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Run configuration (YAML or JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory (overrides the config)");
    sub->add_option("--seed", opt.seed, "Random seed (overrides the config)");
    sub->add_option("--workers", opt.workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    sub->add_option("--design", opt.design, "Design file (chosen.json format)");
  };
  auto* optimize = app.add_subcommand("optimize", "Search the wire-pulley design space");
  auto* simulate = app.add_subcommand("simulate", "Simulate transitions for the configured users");
  auto* sweep = app.add_subcommand("sweep", "Quasi-static load sweeps for the configured users");
  auto* controller = app.add_subcommand("controller-sim", "Replay a torso pressure log through the drive controller");
  auto* report = app.add_subcommand("report", "Summarise a design for the configured users");
  for (auto* sub : {optimize, simulate, sweep, controller, report}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(opt.config);
    if (opt.seed) cfg.seed = cfg.optimizer.nsga.seed = *opt.seed;
    if (opt.workers) cfg.workers = cfg.optimizer.nsga.workers = *opt.workers;
    const fs::path out_dir = opt.out.empty() ? fs::path(cfg.resolve(cfg.output)) : fs::path(opt.out);
    auto* sub = app.get_subcommands().front();
    const Writer writer(out_dir, cfg, sub->get_name());
    if (sub == optimize) return cmd_optimize(cfg, writer);
    if (sub == simulate) return cmd_simulate(cfg, opt, writer);
    if (sub == sweep) return cmd_sweep(cfg, opt, writer);
    if (sub == controller) return cmd_controller_sim(cfg, writer);
    return cmd_report(cfg, opt, writer);
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kParse;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
}
