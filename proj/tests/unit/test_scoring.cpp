#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "rowplan/errors.hpp"
#include "rowplan/scoring.hpp"

using namespace rowplan;
using test::crop;
using test::weed;

TEST_CASE("favorability is time slack") {
  ToolConfig tool;
  CHECK(favorability({0.5, 0.36}, tool) == doctest::Approx(0.928));
  CHECK(favorability({0.5, 5.0}, tool) == doctest::Approx(0.0));
  CHECK(favorability({0.0, 0.1}, tool) == doctest::Approx(-0.02));
  tool.dwell = 0.1;
  CHECK(favorability({0.5, 0.36}, tool) == doctest::Approx(0.828));
}

TEST_CASE("logistic feasibility") {
  CHECK(feasibility(0.0, 10.0) == 0.5);
  CHECK(feasibility(0.0, 1234.5) == 0.5);
  CHECK(feasibility(0.1, 10.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(feasibility(0.1, 10.0) == doctest::Approx(0.731059).epsilon(1e-6));
  CHECK(feasibility(1e3, 10.0) == doctest::Approx(1.0));
  CHECK(feasibility(-1e3, 10.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(feasibility(-1e6, 10.0)));
}

TEST_CASE("feasibility is monotone in the slack") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> s(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    double a = s(rng), b = s(rng);
    if (a > b) std::swap(a, b);
    CHECK(feasibility(a, 10.0) <= feasibility(b, 10.0));
  }
}

TEST_CASE("harmfulness scales with areas and inverse distance") {
  HarmfulnessContext ctx;
  const std::vector<Plant> unit{crop(0, 1.0, 0.0, 100.0)};
  CHECK(harmfulness(weed(1, 1.0, 1.0, 100.0), unit, ctx).kappa == doctest::Approx(1.0));

  const std::vector<Plant> c{crop(0, 0.0, 0.0, 100.0)};
  CHECK(harmfulness(weed(1, 0.0, 0.5, 200.0), c, ctx).kappa == doctest::Approx(4.0));
  CHECK(harmfulness(weed(1, 0.0, 1.0, 200.0), c, ctx).kappa == doctest::Approx(2.0));
}

TEST_CASE("weed-only fields use the nominal crop and reference distance") {
  HarmfulnessContext ctx;
  const auto h = harmfulness(weed(1, 0.3, 0.3, 1000.0), std::vector<Plant>{}, ctx);
  CHECK(h.kappa == doctest::Approx(2.0));
  CHECK_FALSE(h.degenerate);
}

TEST_CASE("priority weight scales beta") {
  HarmfulnessContext ctx;
  const std::vector<Plant> c{crop(0, 0.0, 0.0, 100.0)};
  const double high = harmfulness(weed(1, 0.0, 0.5, 200.0, Priority::high), c, ctx).kappa;
  const double low = harmfulness(weed(1, 0.0, 0.5, 200.0, Priority::low), c, ctx).kappa;
  CHECK(low == doctest::Approx(0.1 * high));
}

TEST_CASE("weed on a crop center is clamped and flagged") {
  HarmfulnessContext ctx;
  const std::vector<Plant> c{crop(0, 0.5, 0.5)};
  const auto h = harmfulness(weed(1, 0.5, 0.5), c, ctx);
  CHECK(h.kappa == ctx.max_kappa);
  CHECK(h.degenerate);
}

TEST_CASE("crop index finds the same crop as a linear scan") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> x(0.0, 10.0), y(0.0, 1.39);
  std::vector<Plant> crops;
  for (int i = 0; i < 60; ++i) crops.push_back(crop(i, x(rng), y(rng)));
  std::sort(crops.begin(), crops.end(), row_order_less);
  const CropIndex index(crops);
  for (int k = 0; k < 500; ++k) {
    const Point q{x(rng), y(rng)};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : crops) best = std::min(best, std::hypot(c.x - q.x, c.y - q.y));
    const Plant* got = index.nearest(q);
    REQUIRE(got != nullptr);
    CHECK(std::hypot(got->x - q.x, got->y - q.y) == doctest::Approx(best));
  }
  CHECK(CropIndex{}.nearest({0.0, 0.0}) == nullptr);
}

TEST_CASE("harmfulness context validation") {
  HarmfulnessContext ctx;
  ctx.reference_distance = 0.0;
  CHECK_THROWS_AS(validate(ctx), ValidationError);
}
