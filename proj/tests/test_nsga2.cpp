#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace stsexo;

namespace {

struct Zdt1 {
  std::size_t n = 30;
  [[nodiscard]] std::size_t num_variables() const { return n; }
  [[nodiscard]] std::size_t num_objectives() const { return 2; }
  [[nodiscard]] std::vector<double> lower_bounds() const { return std::vector<double>(n, 0.0); }
  [[nodiscard]] std::vector<double> upper_bounds() const { return std::vector<double>(n, 1.0); }
  [[nodiscard]] nsga2::Evaluation evaluate(const std::vector<double>& x) const {
    double g = 0.0;
    for (std::size_t i = 1; i < n; ++i) g += x[i];
    g = 1.0 + 9.0 * g / static_cast<double>(n - 1);
    return {{x[0], g * (1.0 - std::sqrt(x[0] / g))}, 0.0};
  }
};

/// Minimise (x - 0.3)^2 + (y + 0.2)^2 subject to x + y >= 0.5.
struct Constrained {
  [[nodiscard]] std::size_t num_variables() const { return 2; }
  [[nodiscard]] std::size_t num_objectives() const { return 1; }
  [[nodiscard]] std::vector<double> lower_bounds() const { return {-1.0, -1.0}; }
  [[nodiscard]] std::vector<double> upper_bounds() const { return {1.0, 1.0}; }
  [[nodiscard]] nsga2::Evaluation evaluate(const std::vector<double>& x) const {
    const double f = (x[0] - 0.3) * (x[0] - 0.3) + (x[1] + 0.2) * (x[1] + 0.2);
    return {{f}, std::max(0.0, 0.5 - x[0] - x[1])};
  }
};

std::vector<std::vector<double>> objectives(const std::vector<nsga2::Individual>& pop) {
  std::vector<std::vector<double>> out;
  for (const auto& i : pop) out.push_back(i.f);
  return out;
}

}  // namespace

TEST(Nsga2, Zdt1ReachesTheTrueFrontHypervolume) {
  nsga2::Config cfg;
  cfg.population = 100;
  cfg.generations = 250;
  cfg.seed = 1;
  const auto res = nsga2::run(Zdt1{}, cfg);
  const auto& g = test::goldens()["zdt1"];
  const double hv = hypervolume(objectives(res.front), g["reference"].get<std::vector<double>>());
  EXPECT_GT(hv, 0.98 * g["hypervolume"].get<double>());
}

TEST(Nsga2, ConstrainedToyMatchesGridSearch) {
  double best = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    for (int j = 0; j <= 2000; ++j) {
      const std::vector<double> x{-1.0 + i * 0.001, -1.0 + j * 0.001};
      const auto e = Constrained{}.evaluate(x);
      if (e.violation == 0.0) best = std::min(best, e.objectives[0]);
    }
  }
  nsga2::Config cfg;
  cfg.population = 40;
  cfg.generations = 150;
  cfg.seed = 3;
  cfg.tolerance = 0.0;
  const auto res = nsga2::run(Constrained{}, cfg);
  ASSERT_FALSE(res.front.empty());
  EXPECT_NEAR(res.front.front().f[0], best, 1e-3);
}

TEST(Nsga2, ResultsDoNotDependOnWorkerCount) {
  nsga2::Config cfg;
  cfg.population = 24;
  cfg.generations = 20;
  cfg.seed = 9;
  const auto one = nsga2::run(Zdt1{}, cfg);
  cfg.workers = 4;
  const auto four = nsga2::run(Zdt1{}, cfg);
  ASSERT_EQ(one.population.size(), four.population.size());
  for (std::size_t i = 0; i < one.population.size(); ++i) {
    EXPECT_EQ(one.population[i].x, four.population[i].x);
    EXPECT_EQ(one.population[i].f, four.population[i].f);
  }
}

TEST(Nsga2, InitialVectorsEnterThePopulation) {
  nsga2::Config cfg;
  cfg.population = 8;
  cfg.generations = 1;
  std::vector<double> seed(30, 0.0);
  seed[0] = 2.0;  // clamped to the bound
  cfg.initial = {seed};
  const auto res = nsga2::run(Zdt1{}, cfg, [&](int gen, const std::vector<nsga2::Individual>&) { (void)gen; });
  bool found = false;
  for (const auto& i : res.population) found = found || (i.x[0] == 1.0 && i.f[1] == 0.0);
  EXPECT_TRUE(found);
  cfg.initial = {{0.5}};
  EXPECT_THROW((void)nsga2::run(Zdt1{}, cfg), RangeError);
}

TEST(Nsga2, InvalidConfigurationIsRejected) {
  nsga2::Config cfg;
  cfg.population = 4;
  EXPECT_THROW((void)nsga2::run(Zdt1{}, cfg), RangeError);
  cfg = {};
  cfg.workers = 0;
  EXPECT_THROW((void)nsga2::run(Zdt1{}, cfg), RangeError);
}

TEST(Dominance, StrictAndConstrainedRules) {
  EXPECT_TRUE(nsga2::dominates({1, 2}, {1, 3}));
  EXPECT_FALSE(nsga2::dominates({1, 2}, {1, 2}));
  EXPECT_FALSE(nsga2::dominates({0, 3}, {1, 2}));
  nsga2::Individual a{{}, {5, 5}, 0.0}, b{{}, {0, 0}, 0.5}, c{{}, {0, 0}, 0.2};
  EXPECT_TRUE(nsga2::constrained_dominates(a, b, 1e-3));
  EXPECT_TRUE(nsga2::constrained_dominates(c, b, 1e-3));
  EXPECT_FALSE(nsga2::constrained_dominates(b, c, 1e-3));
}

TEST(Dominance, SortAssignsRanks) {
  std::vector<nsga2::Individual> pop(4);
  pop[0].f = {1, 4};
  pop[1].f = {2, 2};
  pop[2].f = {3, 3};
  pop[3].f = {4, 4};
  const auto fronts = nsga2::non_dominated_sort(pop, 1e-3);
  ASSERT_EQ(fronts.size(), 3u);
  EXPECT_EQ(fronts[0].size(), 2u);
  EXPECT_EQ(pop[2].rank, 1);
  EXPECT_EQ(pop[3].rank, 2);
}

TEST(Crowding, BoundaryIsInfiniteAndInteriorIsNormalised) {
  std::vector<nsga2::Individual> pop(3);
  pop[0].f = {0, 2};
  pop[1].f = {1, 1};
  pop[2].f = {2, 0};
  nsga2::crowding_distance(pop, {0, 1, 2});
  EXPECT_TRUE(std::isinf(pop[0].crowding));
  EXPECT_TRUE(std::isinf(pop[2].crowding));
  EXPECT_DOUBLE_EQ(pop[1].crowding, 2.0);
}

TEST(Hypervolume, KnownValues) {
  EXPECT_DOUBLE_EQ(hypervolume({{0.5, 0.5}}, {1, 1}), 0.25);
  EXPECT_DOUBLE_EQ(hypervolume({{0, 0.5}, {0.5, 0}}, {1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(hypervolume({{0.5, 0.5}, {0.6, 0.6}}, {1, 1}), 0.25);
  EXPECT_DOUBLE_EQ(hypervolume({{2, 0}}, {1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(hypervolume({{0, 0, 0}}, {1, 2, 3}), 6.0);
  EXPECT_NEAR(hypervolume({{0, 0, 0.5}, {0.5, 0.5, 0}}, {1, 1, 1}), 0.5 + 0.25 * 0.5, 1e-15);
  EXPECT_THROW((void)hypervolume({{0.0}}, {1.0}), RangeError);
}
