#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "rowplan/errors.hpp"
#include "rowplan/oracle.hpp"

using namespace rowplan;
using test::weed;

TEST_CASE("brute force on trivial instances") {
  ToolConfig tool;
  PlannerConfig cfg;
  const Point start{0.0, 0.17};
  auto r = oracle::brute_force_plan({}, {}, start, tool, cfg, SelectionMode::baseline);
  CHECK(r.best_nodes.empty());
  CHECK(r.best_c == 0.0);
  CHECK(r.best_k == 0.0);

  const std::vector<Plant> one{weed(4, 0.3, 0.2)};
  r = oracle::brute_force_plan(one, {}, start, tool, cfg, SelectionMode::baseline);
  CHECK(r.best_nodes == std::vector<PlantId>{4});
  CHECK(r.best_c == doctest::Approx(1.0 / (1.0 + std::exp(-10.0 * (0.6 - 0.03 / 5.0)))));
}

TEST_CASE("brute force refuses large instances") {
  ToolConfig tool;
  PlannerConfig cfg;
  std::vector<Plant> nine;
  for (int i = 0; i < 9; ++i) nine.push_back(weed(i, 0.1 * (i + 1), 0.1));
  CHECK_THROWS_AS(oracle::brute_force_plan(nine, {}, {0.0, 0.1}, tool, cfg, SelectionMode::baseline), SizeError);
}

TEST_CASE("monte carlo reach frequency") {
  CHECK(oracle::monte_carlo_reach(0.0, 0.5, 5.0, 4.309, 10000) == 1.0);
  CHECK(oracle::monte_carlo_reach(0.3, 0.0, 5.0, 4.309, 10000) == 1.0);
  CHECK_THROWS_AS(oracle::monte_carlo_reach(0.3, 0.5, 5.0, 4.309, 100), DomainError);
  CHECK_THROWS_AS(oracle::monte_carlo_reach(-0.3, 0.5, 5.0, 4.309, 10000), DomainError);

  const std::size_t n = 1000000;
  const double p = reach_probability(0.36, 0.5, 5.0, 4.309);
  const double f = oracle::monte_carlo_reach(0.36, 0.5, 5.0, 4.309, n, 1);
  CHECK(std::abs(f - p) <= 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
}
