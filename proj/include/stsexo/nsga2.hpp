#pragma once

/**
 * @file nsga2.hpp
 * @brief Elitist non-dominated sorting genetic algorithm (NSGA-II) with
 * constraint domination.
 *
 * The engine is generic over a problem type providing
 *
 *   std::size_t num_variables() const;
 *   std::size_t num_objectives() const;
 *   std::vector<double> lower_bounds() const;
 *   std::vector<double> upper_bounds() const;
 *   Evaluation evaluate(const std::vector<double>& x) const;   // thread-safe
 *
 * Objectives are minimised. A solution is feasible when its violation does
 * not exceed the configured tolerance.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "stsexo/errors.hpp"

namespace stsexo::nsga2 {

struct Evaluation {
  std::vector<double> objectives;
  double violation = 0.0;
};

struct Config {
  int population = 100;
  int generations = 200;
  double crossover_prob = 0.9;
  double eta_c = 15.0;
  double eta_m = 20.0;
  double mutation_prob = -1.0;  ///< per variable; negative selects 1/n
  std::uint64_t seed = 0;
  int workers = 1;
  double tolerance = 1e-3;
  /// Decision vectors placed first in the initial population (clamped to the bounds).
  std::vector<std::vector<double>> initial;

  void validate() const {
    if (population < 8) throw RangeError("population must be at least 8");
    if (generations < 1) throw RangeError("generations must be at least 1");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw RangeError("crossover probability outside [0, 1]");
    if (!(eta_c >= 0.0) || !(eta_m >= 0.0)) throw RangeError("distribution indices must be non-negative");
    if (mutation_prob > 1.0) throw RangeError("mutation probability above 1");
    if (workers < 1) throw RangeError("worker count must be positive");
  }
};

struct Individual {
  std::vector<double> x;
  std::vector<double> f;
  double violation = 0.0;
  int rank = 0;
  double crowding = 0.0;
  std::uint64_t id = 0;  ///< creation order, used for stable tie-breaking
};

/// Reproducible random stream: doubles are built from the top 53 bits of
/// mt19937_64 so results do not depend on the standard library.
class Random {
public:
  explicit Random(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

private:
  std::mt19937_64 eng_;
};

[[nodiscard]] inline bool feasible(const Individual& a, double tol) { return a.violation <= tol; }

/// Pareto dominance for minimisation.
[[nodiscard]] inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

/// Feasible beats infeasible, lower violation wins among infeasible, Pareto
/// dominance decides among feasible.
[[nodiscard]] inline bool constrained_dominates(const Individual& a, const Individual& b, double tol) {
  const bool fa = feasible(a, tol), fb = feasible(b, tol);
  if (fa && !fb) return true;
  if (!fa && fb) return false;
  if (!fa && !fb) return a.violation < b.violation;
  return dominates(a.f, b.f);
}

/// Fast non-dominated sort; sets `rank` and returns the fronts as index lists.
[[nodiscard]] inline std::vector<std::vector<std::size_t>> non_dominated_sort(std::vector<Individual>& pop,
                                                                             double tol) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (constrained_dominates(pop[p], pop[q], tol)) {
        dominated[p].push_back(q);
        ++count[q];
      } else if (constrained_dominates(pop[q], pop[p], tol)) {
        dominated[q].push_back(p);
        ++count[p];
      }
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (count[p] == 0) {
      pop[p].rank = 0;
      fronts[0].push_back(p);
    }
  }
  for (std::size_t i = 0; !fronts[i].empty(); ++i) {
    std::vector<std::size_t> next;
    for (std::size_t p : fronts[i]) {
      for (std::size_t q : dominated[p]) {
        if (--count[q] == 0) {
          pop[q].rank = static_cast<int>(i + 1);
          next.push_back(q);
        }
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

/// Crowding distance within one front; boundary points get infinity.
inline void crowding_distance(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
  if (front.empty()) return;
  for (std::size_t i : front) pop[i].crowding = 0.0;
  const std::size_t nobj = pop[front[0]].f.size();
  std::vector<std::size_t> order(front);
  for (std::size_t k = 0; k < nobj; ++k) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a].f[k] < pop[b].f[k]; });
    const double lo = pop[order.front()].f[k], hi = pop[order.back()].f[k];
    pop[order.front()].crowding = std::numeric_limits<double>::infinity();
    pop[order.back()].crowding = std::numeric_limits<double>::infinity();
    if (!(hi > lo)) continue;
    for (std::size_t j = 1; j + 1 < order.size(); ++j) {
      pop[order[j]].crowding += (pop[order[j + 1]].f[k] - pop[order[j - 1]].f[k]) / (hi - lo);
    }
  }
}

/// Simulated binary crossover of one variable pair inside [lo, hi].
inline void sbx(double& c1, double& c2, double lo, double hi, double eta, Random& rng) {
  const double y1 = std::min(c1, c2), y2 = std::max(c1, c2);
  if (std::abs(y2 - y1) < 1e-14 || !(hi > lo)) return;
  const double u = rng.uniform();
  auto child = [&](double beta) {
    const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    const double bq = u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                       : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    return bq;
  };
  const double bq1 = child(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
  double a = 0.5 * ((y1 + y2) - bq1 * (y2 - y1));
  const double bq2 = child(1.0 + 2.0 * (hi - y2) / (y2 - y1));
  double b = 0.5 * ((y1 + y2) + bq2 * (y2 - y1));
  a = std::clamp(a, lo, hi);
  b = std::clamp(b, lo, hi);
  if (rng.uniform() <= 0.5) std::swap(a, b);
  c1 = a;
  c2 = b;
}

/// Bounded polynomial mutation of one variable.
inline void polynomial_mutation(double& y, double lo, double hi, double eta, Random& rng) {
  if (!(hi > lo)) return;
  const double d1 = (y - lo) / (hi - lo), d2 = (hi - y) / (hi - lo);
  const double u = rng.uniform();
  const double p = 1.0 / (eta + 1.0);
  double dq;
  if (u <= 0.5) {
    const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
    dq = std::pow(val, p) - 1.0;
  } else {
    const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
    dq = 1.0 - std::pow(val, p);
  }
  y = std::clamp(y + dq * (hi - lo), lo, hi);
}

/// Calls fn(i) for i in [0, n), splitting the range over `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (n + w - 1) / w;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t from = t * chunk, to = std::min(n, from + chunk);
    if (from < to) {
      threads.emplace_back([&fn, from, to] {
        for (std::size_t i = from; i < to; ++i) fn(i);
      });
    }
  }
  for (auto& th : threads) th.join();
}

/// Evaluates x[i] for every individual from `begin` on. Results are written
/// by index, so they do not depend on the number of workers.
template <typename Problem>
void evaluate_all(const Problem& problem, std::vector<Individual>& pop, std::size_t begin, int workers) {
  parallel_for(pop.size() - begin, workers, [&](std::size_t i) {
    Evaluation e = problem.evaluate(pop[begin + i].x);
    pop[begin + i].f = std::move(e.objectives);
    pop[begin + i].violation = e.violation;
  });
}

struct Result {
  std::vector<Individual> population;  ///< final parent population, sorted by (rank, -crowding, id)
  std::vector<Individual> front;       ///< feasible rank-0 members
  int generations = 0;
  std::size_t evaluations = 0;
  double best_violation = std::numeric_limits<double>::infinity();
};

/// Called after each generation with the generation number and the parent population.
using Observer = std::function<void(int, const std::vector<Individual>&)>;

namespace detail {

/// Sorts pop in place by rank, then crowding (descending), then id.
inline void sort_survivors(std::vector<Individual>& pop) {
  std::stable_sort(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.crowding != b.crowding) return a.crowding > b.crowding;
    return a.id < b.id;
  });
}

/// Environmental selection: keeps the best `n` of `pool`.
inline std::vector<Individual> select(std::vector<Individual> pool, std::size_t n, double tol) {
  const auto fronts = non_dominated_sort(pool, tol);
  std::vector<Individual> next;
  next.reserve(n);
  for (const auto& front : fronts) {
    crowding_distance(pool, front);
    if (next.size() + front.size() <= n) {
      for (std::size_t i : front) next.push_back(pool[i]);
      if (next.size() == n) break;
      continue;
    }
    std::vector<std::size_t> order(front);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (pool[a].crowding != pool[b].crowding) return pool[a].crowding > pool[b].crowding;
      return pool[a].id < pool[b].id;
    });
    for (std::size_t j = 0; next.size() < n; ++j) next.push_back(pool[order[j]]);
    break;
  }
  sort_survivors(next);
  return next;
}

inline const Individual& tournament(const std::vector<Individual>& pop, Random& rng) {
  const Individual& a = pop[rng.index(pop.size())];
  const Individual& b = pop[rng.index(pop.size())];
  if (a.rank != b.rank) return a.rank < b.rank ? a : b;
  if (a.crowding != b.crowding) return a.crowding > b.crowding ? a : b;
  return a.id <= b.id ? a : b;
}

}  // namespace detail

template <typename Problem>
[[nodiscard]] Result run(const Problem& problem, const Config& cfg, const Observer& observer = {}) {
  cfg.validate();
  const std::size_t nvar = problem.num_variables();
  const auto lo = problem.lower_bounds();
  const auto hi = problem.upper_bounds();
  if (lo.size() != nvar || hi.size() != nvar) throw RangeError("bounds do not match the variable count");
  for (std::size_t i = 0; i < nvar; ++i) {
    if (!(lo[i] <= hi[i])) throw RangeError("lower bound above upper bound");
  }
  const double pm = cfg.mutation_prob < 0.0 ? 1.0 / static_cast<double>(nvar) : cfg.mutation_prob;
  const std::size_t N = static_cast<std::size_t>(cfg.population);

  Random rng(cfg.seed);
  std::uint64_t next_id = 0;
  Result res;

  std::vector<Individual> pop(N);
  for (std::size_t j = 0; j < N; ++j) {
    auto& ind = pop[j];
    ind.x.resize(nvar);
    for (std::size_t i = 0; i < nvar; ++i) ind.x[i] = lo[i] + rng.uniform() * (hi[i] - lo[i]);
    if (j < cfg.initial.size()) {
      if (cfg.initial[j].size() != nvar) throw RangeError("initial individual has the wrong dimension");
      for (std::size_t i = 0; i < nvar; ++i) ind.x[i] = std::clamp(cfg.initial[j][i], lo[i], hi[i]);
    }
    ind.id = next_id++;
  }
  evaluate_all(problem, pop, 0, cfg.workers);
  res.evaluations += N;
  pop = detail::select(std::move(pop), N, cfg.tolerance);
  if (observer) observer(0, pop);

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::vector<Individual> pool = pop;
    pool.reserve(2 * N);
    while (pool.size() < 2 * N) {
      Individual c1, c2;
      c1.x = detail::tournament(pop, rng).x;
      c2.x = detail::tournament(pop, rng).x;
      if (rng.uniform() <= cfg.crossover_prob) {
        for (std::size_t i = 0; i < nvar; ++i) {
          if (rng.uniform() <= 0.5) sbx(c1.x[i], c2.x[i], lo[i], hi[i], cfg.eta_c, rng);
        }
      }
      for (auto* c : {&c1, &c2}) {
        for (std::size_t i = 0; i < nvar; ++i) {
          if (rng.uniform() < pm) polynomial_mutation(c->x[i], lo[i], hi[i], cfg.eta_m, rng);
        }
        c->id = next_id++;
      }
      pool.push_back(std::move(c1));
      if (pool.size() < 2 * N) pool.push_back(std::move(c2));
    }
    evaluate_all(problem, pool, N, cfg.workers);
    res.evaluations += N;
    pop = detail::select(std::move(pool), N, cfg.tolerance);
    res.generations = gen;
    if (observer) observer(gen, pop);
  }

  for (const auto& ind : pop) {
    res.best_violation = std::min(res.best_violation, ind.violation);
    if (ind.rank == 0 && feasible(ind, cfg.tolerance)) res.front.push_back(ind);
  }
  res.population = std::move(pop);
  return res;
}

}  // namespace stsexo::nsga2
