#pragma once

/**
 * @file optimizer.hpp
 * @brief Mechanism design search: NSGA-II over the wire-pulley geometry,
 * Pareto front bookkeeping, knee-point choice and actuator placement.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stsexo/gas_spring.hpp"
#include "stsexo/hypervolume.hpp"
#include "stsexo/nsga2.hpp"
#include "stsexo/objectives.hpp"

namespace stsexo {

enum class EqualityHandling {
  Penalty,  ///< synchronisation residuals count towards the violation
  Repair,   ///< pulley radii are solved from the synchronisation conditions
};

/// Radii that satisfy both synchronisation conditions exactly.
[[nodiscard]] inline DesignVector repair_radii(DesignVector d, const EngagementAngles& a) {
  d.r1 = (free_length_p1(d, a.q_f) - free_length_p1(d, a.q_o)) / a.standing_span();
  d.r2 = (free_length_p2(d, a.q_o) - free_length_p2(d, a.q_f)) / a.sitting_span();
  return d;
}

/// Adapts candidate evaluation to the NSGA-II problem interface.
class DesignProblem {
public:
  explicit DesignProblem(const EvalContext& ctx, EqualityHandling eq = EqualityHandling::Penalty)
      : ctx_(ctx), eq_(eq) {
    const auto [lo, hi] = ctx.bounds.box();
    lo_.assign(lo.begin(), lo.end());
    hi_.assign(hi.begin(), hi.end());
  }

  [[nodiscard]] std::size_t num_variables() const { return DesignVector::kSize; }
  [[nodiscard]] std::size_t num_objectives() const { return 3; }
  [[nodiscard]] std::vector<double> lower_bounds() const { return lo_; }
  [[nodiscard]] std::vector<double> upper_bounds() const { return hi_; }

  /// Design encoded by x; in repair mode the radius genes are ignored.
  [[nodiscard]] DesignVector decode(const std::vector<double>& x) const {
    DesignVector::Array a{};
    std::copy_n(x.begin(), DesignVector::kSize, a.begin());
    const auto d = DesignVector::from_array(a);
    return eq_ == EqualityHandling::Repair ? repair_radii(d, ctx_.angles) : d;
  }

  [[nodiscard]] nsga2::Evaluation evaluate(const std::vector<double>& x) const {
    const Candidate c = evaluate_candidate(decode(x), ctx_);
    return {c.objectives.to_vector(), c.constraint_violation};
  }

  [[nodiscard]] const EvalContext& context() const noexcept { return ctx_; }

private:
  EvalContext ctx_;
  EqualityHandling eq_;
  std::vector<double> lo_, hi_;
};

// ---------------------------------------------------------------------------
// Pareto front

class ParetoFront {
public:
  /// Adds `c` if no member dominates it, removing members it dominates.
  /// Infeasible candidates and exact duplicates are rejected.
  bool insert(const Candidate& c) {
    if (!c.feasible) return false;
    const auto f = c.objectives.to_vector();
    for (const auto& m : members_) {
      const auto g = m.objectives.to_vector();
      if (nsga2::dominates(g, f) || g == f) return false;
    }
    std::erase_if(members_, [&](const Candidate& m) { return nsga2::dominates(f, m.objectives.to_vector()); });
    members_.push_back(c);
    return true;
  }

  [[nodiscard]] const std::vector<Candidate>& members() const noexcept { return members_; }
  [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
  [[nodiscard]] bool empty() const noexcept { return members_.empty(); }

  [[nodiscard]] std::vector<std::vector<double>> objective_points() const {
    std::vector<std::vector<double>> pts;
    for (const auto& m : members_) pts.push_back(m.objectives.to_vector());
    return pts;
  }

  [[nodiscard]] double hypervolume(const std::vector<double>& ref) const {
    return stsexo::hypervolume(objective_points(), ref);
  }

  /// True when no member dominates another.
  [[nodiscard]] bool is_mutually_non_dominated() const {
    for (std::size_t i = 0; i < members_.size(); ++i) {
      for (std::size_t j = 0; j < members_.size(); ++j) {
        if (i != j && nsga2::dominates(members_[i].objectives.to_vector(), members_[j].objectives.to_vector())) {
          return false;
        }
      }
    }
    return true;
  }

  int generation = 0;

private:
  std::vector<Candidate> members_;
};

struct OptimizerConfig {
  nsga2::Config nsga;
  EqualityHandling equality = EqualityHandling::Repair;
  std::array<double, 3> hv_reference{20.0, 1.0, 1.0};
  std::array<double, 3> knee_weights{1.0, 2.0, 1.0};  ///< moment, motion, torque
};

struct OptimizationResult {
  ParetoFront front;
  std::vector<double> hypervolume_history;  ///< per generation, of the feasible first front
  std::vector<std::array<double, 3>> best_objective_history;
  std::size_t evaluations = 0;
};

/// Runs NSGA-II over the design space. Throws NoFeasibleDesign when the
/// final population holds no feasible design.
[[nodiscard]] inline OptimizationResult nsga2_run(const OptimizerConfig& cfg, const EvalContext& ctx) {
  const DesignProblem problem(ctx, cfg.equality);
  nsga2::Config nc = cfg.nsga;
  nc.tolerance = ctx.tolerance;
  OptimizationResult out;
  const std::vector<double> ref(cfg.hv_reference.begin(), cfg.hv_reference.end());
  auto observer = [&](int, const std::vector<nsga2::Individual>& pop) {
    std::vector<std::vector<double>> pts;
    std::array<double, 3> best{kWorstObjective, kWorstObjective, kWorstObjective};
    for (const auto& ind : pop) {
      if (!nsga2::feasible(ind, nc.tolerance)) continue;
      for (int k = 0; k < 3; ++k) best[k] = std::min(best[k], ind.f[k]);
      if (ind.rank == 0) pts.push_back(ind.f);
    }
    out.hypervolume_history.push_back(hypervolume(pts, ref));
    out.best_objective_history.push_back(best);
  };
  const auto res = nsga2::run(problem, nc, observer);
  out.evaluations = res.evaluations;
  for (const auto& ind : res.front) {
    Candidate c = evaluate_candidate(problem.decode(ind.x), ctx);
    out.front.insert(c);
  }
  out.front.generation = res.generations;
  if (out.front.empty()) throw NoFeasibleDesign("no feasible design found", res.best_violation);
  return out;
}

/// Member closest to the ideal point under the weighted, range-normalised
/// objective distance.
[[nodiscard]] inline std::size_t pick_knee_point(const ParetoFront& front, const std::array<double, 3>& weights) {
  if (front.empty()) throw RangeError("empty Pareto front");
  const auto pts = front.objective_points();
  std::array<double, 3> lo{}, hi{};
  for (int k = 0; k < 3; ++k) {
    lo[k] = hi[k] = pts[0][k];
    for (const auto& p : pts) lo[k] = std::min(lo[k], p[k]), hi[k] = std::max(hi[k], p[k]);
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double s = hi[k] > lo[k] ? (pts[i][k] - lo[k]) / (hi[k] - lo[k]) : 0.0;
      d += weights[k] * s * s;
    }
    if (d < best_d) best_d = d, best = i;
  }
  return best;
}

[[nodiscard]] inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Actuator placement

struct PlacementContext {
  BodyModel body;  ///< user the placement must serve
  ExoModel exo;
  EngagementAngles angles;
  DesignBounds bounds;
  SimOptions sim;
  std::vector<int> spring_counts{2, 3};
  int grid = 12;            ///< coarse samples per mounting coordinate
  int refine_iterations = 60;
};

struct PlacementResult {
  ActuatorPlacement placement;
  std::size_t spring_index = 0;
  double objective = 0.0;  ///< sum of tau_a over the standing sweep (N m)
};

/// Precomputed loads of one design for a placement search.
struct PlacementLoads {
  std::vector<double> q2_standing, Mo_standing;
  std::vector<double> q2_sitting, Mo_sitting;
};

[[nodiscard]] inline PlacementLoads placement_loads(const DesignVector& d, const PlacementContext& ctx) {
  PlacementLoads L;
  const auto st = quasi_static_sweep(ctx.body, ctx.exo, d, nullptr, nullptr, ctx.angles, Direction::SitToStand, ctx.sim);
  const auto si = quasi_static_sweep(ctx.body, ctx.exo, d, nullptr, nullptr, ctx.angles, Direction::StandToSit, ctx.sim);
  for (const auto& p : st) L.q2_standing.push_back(p.q2), L.Mo_standing.push_back(p.knee.Mo);
  for (const auto& p : si) L.q2_sitting.push_back(p.q2), L.Mo_sitting.push_back(p.knee.Mo);
  return L;
}

/// Smallest relative load margin of a placement over both sweeps: positive
/// when tau_a exceeds the standing load and stays below the sitting load
/// everywhere. Evaluation stops early once the margin drops below `floor`.
[[nodiscard]] inline double placement_margin(const ActuatorPlacement& pl, const GasSpring& s, const PlacementLoads& L,
                                             double floor = -std::numeric_limits<double>::infinity()) {
  double margin = std::numeric_limits<double>::infinity();
  try {
    for (std::size_t k = 0; k < L.q2_standing.size() && margin >= floor; ++k) {
      const double t = actuator_torque(pl, s, L.q2_standing[k], 0.0, SpringMotion::Extension);
      margin = std::min(margin, (t - L.Mo_standing[k]) / std::max(1.0, std::abs(L.Mo_standing[k])));
    }
    for (std::size_t k = 0; k < L.q2_sitting.size() && margin >= floor; ++k) {
      const double t = actuator_torque(pl, s, L.q2_sitting[k], 0.0, SpringMotion::Compression);
      margin = std::min(margin, (L.Mo_sitting[k] - t) / std::max(1.0, std::abs(L.Mo_sitting[k])));
    }
  } catch (const StrokeError&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const GeometryError&) {
    return -std::numeric_limits<double>::infinity();
  }
  return margin;
}

/// Standing-sweep torque sum when the placement satisfies every
/// constraint, empty otherwise.
[[nodiscard]] inline std::optional<double> placement_objective(const ActuatorPlacement& pl, const GasSpring& s,
                                                               const PlacementLoads& L) {
  if (!(placement_margin(pl, s, L, 0.0) > 0.0)) return std::nullopt;
  double sum = 0.0;
  for (double q2 : L.q2_standing) sum += actuator_torque(pl, s, q2, 0.0, SpringMotion::Extension);
  return sum;
}

namespace detail {

using Mount = std::array<double, 4>;  // a.x, a.y, b.x, b.y

/// Greedy coordinate search maximising `f` from `z`; returns the final value.
template <class F>
double compass_search(F&& f, Mount& z, double fz, const Mount& lo, const Mount& hi, Mount step, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    bool improved = false;
    for (int k = 0; k < 4; ++k) {
      for (double sgn : {1.0, -1.0}) {
        Mount c = z;
        c[k] = std::clamp(c[k] + sgn * step[k], lo[k], hi[k]);
        const double v = f(c);
        if (v > fz) fz = v, z = c, improved = true;
      }
    }
    if (!improved) {
      for (auto& s : step) s *= 0.5;
      if (step[0] < 1e-5) break;
    }
  }
  return fz;
}

}  // namespace detail

/**
 * Chooses spring type, spring count and mounting points maximising the
 * standing-sweep actuator torque subject to the standing, sitting and
 * stroke constraints. For every spring and count a coarse grid over the
 * mounting points seeds a search for the largest load margin; once a
 * feasible mounting is found a second search maximises the torque.
 */
[[nodiscard]] inline PlacementResult place_actuator(const DesignVector& d, const std::vector<GasSpring>& catalog,
                                                    const PlacementContext& ctx) {
  if (catalog.empty()) throw RangeError("empty spring catalog");
  const PlacementLoads L = placement_loads(d, ctx);
  const auto [alo, ahi] = ctx.bounds.thigh_area.bounds();
  const auto [blo, bhi] = ctx.bounds.base_area.bounds();
  const detail::Mount lo{alo.x(), alo.y(), blo.x(), blo.y()};
  const detail::Mount hi{ahi.x(), ahi.y(), bhi.x(), bhi.y()};
  const int n = std::max(2, ctx.grid);
  detail::Mount step{};
  for (int k = 0; k < 4; ++k) step[k] = (hi[k] - lo[k]) / (n - 1);
  constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

  std::optional<PlacementResult> best;
  for (std::size_t si = 0; si < catalog.size(); ++si) {
    for (int count : ctx.spring_counts) {
      auto make = [&](const detail::Mount& z) {
        ActuatorPlacement pl;
        pl.a = {z[0], z[1]};
        pl.b = {z[2], z[3]};
        pl.spring_count = count;
        pl.extended_knee_angle = ctx.angles.q_f;
        return pl;
      };
      auto inside = [&](const ActuatorPlacement& pl) {
        return ctx.bounds.thigh_area.contains(pl.a) && ctx.bounds.base_area.contains(pl.b);
      };
      double margin_best = kInfeasible;
      auto margin = [&](const detail::Mount& z) {
        const auto pl = make(z);
        return inside(pl) ? placement_margin(pl, catalog[si], L, margin_best) : kInfeasible;
      };
      detail::Mount z{};
      std::array<int, 4> idx{};
      for (idx[0] = 0; idx[0] < n; ++idx[0])
        for (idx[1] = 0; idx[1] < n; ++idx[1])
          for (idx[2] = 0; idx[2] < n; ++idx[2])
            for (idx[3] = 0; idx[3] < n; ++idx[3]) {
              detail::Mount c{};
              for (int k = 0; k < 4; ++k) c[k] = lo[k] + (hi[k] - lo[k]) * idx[k] / (n - 1);
              const double v = margin(c);
              if (v > margin_best) margin_best = v, z = c;
            }
      if (margin_best == kInfeasible) continue;
      if (!(margin_best > 0.0)) {
        margin_best = detail::compass_search(margin, z, margin_best, lo, hi, step, ctx.refine_iterations);
        if (!(margin_best > 0.0)) continue;
      }
      auto torque = [&](const detail::Mount& c) {
        const auto pl = make(c);
        if (!inside(pl)) return kInfeasible;
        return placement_objective(pl, catalog[si], L).value_or(kInfeasible);
      };
      const double obj = detail::compass_search(torque, z, torque(z), lo, hi, step, ctx.refine_iterations);
      if (!best || obj > best->objective) best = PlacementResult{make(z), si, obj};
    }
  }
  if (!best) throw NoFeasibleActuator("no spring and mounting satisfies the load constraints");
  return *best;
}

struct DesignChoice {
  std::size_t index = 0;                    ///< into front.members()
  std::optional<PlacementResult> placement; ///< actuator for the chosen member, when one was found
  std::size_t placeable = 0;                ///< members admitting a feasible actuator
};

/**
 * Knee-point choice restricted to the members for which an actuator
 * placement exists for `ctx.body`. Falls back to the unrestricted knee
 * point when no member can be actuated.
 */
[[nodiscard]] inline DesignChoice choose_design(const ParetoFront& front, const std::array<double, 3>& weights,
                                                const std::vector<GasSpring>& catalog, const PlacementContext& ctx,
                                                int workers = 1) {
  if (front.empty()) throw RangeError("empty Pareto front");
  const auto& members = front.members();
  std::vector<std::optional<PlacementResult>> placements(members.size());
  nsga2::parallel_for(members.size(), workers, [&](std::size_t i) {
    try {
      placements[i] = place_actuator(members[i].design, catalog, ctx);
    } catch (const NoFeasibleActuator&) {
    }
  });
  ParetoFront sub;
  std::vector<std::size_t> map;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (placements[i] && sub.insert(members[i])) map.push_back(i);
  }
  DesignChoice out;
  out.placeable = map.size();
  if (map.empty()) {
    out.index = pick_knee_point(front, weights);
    return out;
  }
  out.index = map[pick_knee_point(sub, weights)];
  out.placement = placements[out.index];
  return out;
}

}  // namespace stsexo
