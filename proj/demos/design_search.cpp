// Small wire-pulley design search for a 70 kg / 1.75 m user, printing the
// resulting Pareto front and its knee point.

#include <cstdio>

#include "stsexo/stsexo.hpp"

using namespace stsexo;

int main() {
  EvalContext ctx;
  ctx.body = build_body_model({70.0, 1.75, 2, "demo"});
  ctx.norms = make_norms(ctx.exo, ctx.angles, ctx.sim);
  ctx.sim.moment_ref = ctx.norms.moment_ref;
  const auto catalog = load_spring_catalog(STSEXO_DATA_DIR "/gas_springs.csv");
  ctx.spring = catalog.front();

  OptimizerConfig cfg;
  cfg.nsga.population = 60;
  cfg.nsga.generations = 40;
  cfg.nsga.seed = 11;
  cfg.equality = EqualityHandling::Repair;

  try {
    const auto res = nsga2_run(cfg, ctx);
    const auto& members = res.front.members();
    std::printf("%zu evaluations, %zu non-dominated designs\n", res.evaluations, members.size());
    std::printf("%10s %10s %10s %8s %8s\n", "j_moment", "j_motion", "j_torque", "r1 [mm]", "r2 [mm]");
    for (const auto& m : members) {
      std::printf("%10.4f %10.4f %10.4f %8.1f %8.1f\n", m.objectives.j_moment, m.objectives.j_motion,
                  m.objectives.j_torque, 1e3 * m.design.r1, 1e3 * m.design.r2);
    }
    const auto& knee = members[pick_knee_point(res.front, cfg.knee_weights)];
    std::printf("knee point: j_moment %.4f, j_motion %.4f, j_torque %.4f\n", knee.objectives.j_moment,
                knee.objectives.j_motion, knee.objectives.j_torque);
  } catch (const NoFeasibleDesign& e) {
    std::printf("no feasible design in this budget (best violation %.3g)\n", e.best_violation());
    return 2;
  }
  return 0;
}
