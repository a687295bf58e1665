#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "rowplan/assignment.hpp"
#include "rowplan/errors.hpp"

using namespace rowplan;
using test::weed;

TEST_CASE("band edges follow the half-open convention") {
  ToolConfig tool;
  const std::vector<Plant> w{weed(0, 0.1, 0.0), weed(1, 0.2, 1.39 / 4.0)};
  const auto axes = assign_static(w, tool);
  REQUIRE(axes.size() == 4);
  CHECK(axes[0].ids() == std::vector<PlantId>{0});
  CHECK(axes[1].ids() == std::vector<PlantId>{1});
}

TEST_CASE("twelve uniform weeds are partitioned by quarter band") {
  ToolConfig tool;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> x(0.0, 1.0), y(0.0, 1.39);
  std::vector<Plant> w;
  for (int i = 0; i < 12; ++i) w.push_back(weed(i, x(rng), y(rng)));
  std::sort(w.begin(), w.end(), row_order_less);

  const auto axes = assign_static(w, tool);
  std::multiset<PlantId> seen;
  for (const auto& a : axes) {
    for (const auto& t : a.targets) {
      seen.insert(t.id);
      // Direct enumeration: quarter index from the raw coordinate.
      CHECK(static_cast<int>(t.y / (1.39 / 4.0)) == a.axis_id);
    }
    CHECK(std::is_sorted(a.targets.begin(), a.targets.end(), row_order_less));
  }
  CHECK(seen.size() == 12);
  CHECK(std::set<PlantId>(seen.begin(), seen.end()).size() == 12);
}

TEST_CASE("crops are not assigned") {
  ToolConfig tool;
  const std::vector<Plant> w{test::crop(0, 0.1, 0.7), weed(1, 0.2, 0.7)};
  std::size_t total = 0;
  for (const auto& a : assign_static(w, tool)) total += a.targets.size();
  CHECK(total == 1);
}

TEST_CASE("plants outside the workspace are rejected") {
  ToolConfig tool;
  Plant p = weed(0, 0.1, 1.39);
  CHECK_THROWS_AS(assign_static(std::vector<Plant>{p}, tool), AssignmentError);
  p.y = -0.01;
  CHECK_THROWS_AS(assign_static(std::vector<Plant>{p}, tool), AssignmentError);
}

TEST_CASE("only the static strategy is implemented") {
  ToolConfig tool;
  CHECK_NOTHROW(assign(AssignmentStrategy::static_division, {}, tool));
  CHECK_THROWS_AS(assign(AssignmentStrategy::distance_based, {}, tool), NotImplementedError);
  CHECK_THROWS_AS(assign(AssignmentStrategy::dynamic_division, {}, tool), NotImplementedError);
}
