#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "rowplan/errors.hpp"
#include "rowplan/trajectory.hpp"

using namespace rowplan;
using test::weed;

namespace {

std::set<std::vector<PlantId>> node_lists(const std::vector<TrajectoryCandidate>& cands) {
  std::set<std::vector<PlantId>> out;
  for (const auto& c : cands) out.insert(c.nodes);
  return out;
}

// Reference enumeration written from the definitions: ordered subsets that
// move strictly downstream with every edge's logistic slack at or above rho.
std::set<std::vector<PlantId>> reference_candidates(const std::vector<Plant>& targets, Point start,
                                                    const ToolConfig& tool, double omega, double rho) {
  std::set<std::vector<PlantId>> out{{}};
  std::vector<PlantId> path;
  std::function<void(Point, double)> grow = [&](Point at, double min_x) {
    for (const auto& t : targets) {
      if (!(t.x > min_x) && !(path.empty() && t.x >= min_x)) continue;
      const double s = (t.x - at.x) / tool.gamma - std::abs(t.y - at.y) / tool.theta - tool.dwell;
      if (1.0 / (1.0 + std::exp(-omega * s)) < rho) continue;
      path.push_back(t.id);
      out.insert(path);
      grow({t.x, t.y}, t.x);
      path.pop_back();
    }
  };
  grow(start, start.x);
  return out;
}

std::vector<Plant> random_targets(std::mt19937_64& rng, int n, const Band& band, double span) {
  std::uniform_real_distribution<double> x(0.0, span), y(band.lo, std::nextafter(band.hi, band.lo));
  std::vector<Plant> w;
  for (int i = 0; i < n; ++i) w.push_back(weed(i, x(rng), y(rng), 400.0, i % 3 ? Priority::low : Priority::high));
  std::sort(w.begin(), w.end(), row_order_less);
  return w;
}

}  // namespace

TEST_CASE("graph edges form the full downstream DAG") {
  ToolConfig tool;
  PlannerConfig cfg;
  const Point start{0.0, 0.17};
  auto g = build_graph(std::vector<Plant>{}, CropIndex{}, tool, cfg, start);
  CHECK(g.nodes().size() == 1);
  CHECK(g.edges().empty());

  const std::vector<Plant> three{weed(0, 0.1, 0.1), weed(1, 0.2, 0.2), weed(2, 0.3, 0.3)};
  g = build_graph(three, CropIndex{}, tool, cfg, start);
  CHECK(g.target_count() == 3);
  CHECK(g.edges().size() == 6);
  const auto* e = g.edge(1, 3);
  REQUIRE(e != nullptr);
  CHECK(e->s == doctest::Approx(0.2 / 0.5 - 0.2 / 5.0));
  CHECK(e->gamma_score == doctest::Approx(1.0 / (1.0 + std::exp(-10.0 * e->s))));
  CHECK(g.edge(3, 1) == nullptr);
}

TEST_CASE("targets at equal x share no edge") {
  ToolConfig tool;
  PlannerConfig cfg;
  const std::vector<Plant> pair{weed(0, 0.2, 0.1), weed(1, 0.2, 0.3)};
  const auto g = build_graph(pair, CropIndex{}, tool, cfg, {0.0, 0.17});
  CHECK(g.edges().size() == 2);
  CHECK(g.edge(1, 2) == nullptr);
  CHECK(g.edge(2, 1) == nullptr);
}

TEST_CASE("one reachable target gives the empty and single candidates") {
  ToolConfig tool;
  PlannerConfig cfg;
  const std::vector<Plant> one{weed(0, 0.3, 0.2)};
  const auto g = build_graph(one, CropIndex{}, tool, cfg, {0.0, 0.17});
  CHECK(node_lists(enumerate_notsp(g, cfg)) == std::set<std::vector<PlantId>>{{}, {0}});
}

TEST_CASE("an infeasible link is never chained") {
  ToolConfig tool;
  PlannerConfig cfg;
  // 0 -> 1: 0.02 m along, 0.24 m across: s = 0.04 - 0.048 < 0, Gamma < 0.6.
  const std::vector<Plant> two{weed(0, 0.20, 0.10), weed(1, 0.22, 0.34)};
  const auto g = build_graph(two, CropIndex{}, tool, cfg, {0.0, 0.10});
  REQUIRE(g.edge(0, 1)->gamma_score >= cfg.rho);
  REQUIRE(g.edge(0, 2)->gamma_score >= cfg.rho);
  REQUIRE(g.edge(1, 2)->gamma_score < cfg.rho);
  CHECK(node_lists(enumerate_notsp(g, cfg)) == std::set<std::vector<PlantId>>{{}, {0}, {1}});
}

TEST_CASE("candidate sets match a reference enumeration") {
  ToolConfig tool;
  PlannerConfig cfg;
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto targets = random_targets(rng, 6, tool.band(1), 0.6);
    const Point start{0.0, tool.band(1).center()};
    const auto g = build_graph(targets, CropIndex{}, tool, cfg, start);
    CHECK(node_lists(enumerate_notsp(g, cfg)) == reference_candidates(targets, start, tool, cfg.omega, cfg.rho));
  }
}

TEST_CASE("trajectory score is the mean edge feasibility with a cutoff") {
  const std::vector<GraphNode> nodes{{kStartNodeId, {0.0, 0.0}, 0.0}, {1, {0.1, 0.0}, 1.0}, {2, {0.2, 0.0}, 1.0}};
  auto make = [&](double g01, double g12) {
    return FeasibilityGraph(nodes, {{kStartNodeId, 1, 0.1, g01, 0.0}, {kStartNodeId, 2, 0.1, 1.0, 0.0},
                                    {1, 2, 0.1, g12, 0.0}});
  };
  TrajectoryCandidate t;
  t.nodes = {1, 2};
  CHECK(score_trajectory(t, make(1.0, 1.0), 0.6) == doctest::Approx(1.0));
  CHECK(score_trajectory(t, make(0.8, 0.9), 0.6) == doctest::Approx(0.85));
  CHECK(score_trajectory(t, make(0.8, 0.55), 0.6) == 0.0);
  CHECK(score_trajectory(TrajectoryCandidate{}, make(1.0, 1.0), 0.6) == 0.0);
}

TEST_CASE("selection rules") {
  auto cand = [](std::vector<PlantId> ids, double c, double k, double travel = 0.0) {
    TrajectoryCandidate t;
    t.nodes = std::move(ids);
    t.c_score = c;
    t.k_score = k;
    t.travel_m = travel;
    return t;
  };
  const std::vector<TrajectoryCandidate> pool{cand({}, 0.0, 0.0), cand({1}, 0.9, 1.1), cand({2}, 0.7, 2.0),
                                              cand({1, 3}, 0.65, 1.5)};
  CHECK(select_trajectory(pool, SelectionMode::biodiv).nodes == std::vector<PlantId>{2});
  CHECK(select_trajectory(pool, SelectionMode::baseline).nodes == std::vector<PlantId>{1, 3});

  const std::vector<TrajectoryCandidate> dead{cand({}, 0.0, 0.0), cand({1}, 0.0, 5.0), cand({1, 2}, 0.0, 9.0)};
  CHECK(select_trajectory(dead, SelectionMode::baseline).empty());
  CHECK(select_trajectory(dead, SelectionMode::biodiv).empty());

  const std::vector<TrajectoryCandidate> tie{cand({4}, 0.8, 1.0, 0.2), cand({5}, 0.8, 1.0, 0.1)};
  CHECK(select_trajectory(tie, SelectionMode::baseline).nodes == std::vector<PlantId>{5});
}

TEST_CASE("exhaustive enumeration respects the target cap") {
  ToolConfig tool;
  PlannerConfig cfg;
  cfg.max_window_targets = 4;
  std::mt19937_64 rng(3);
  const auto g = build_graph(random_targets(rng, 5, tool.band(0), 1.0), CropIndex{}, tool, cfg, {0.0, 0.1});
  try {
    enumerate_notsp(g, cfg);
    FAIL("expected a window overflow");
  } catch (const WindowOverflowError& e) {
    CHECK(e.count() == 5);
    CHECK(e.cap() == 4);
  }
  cfg.solver = WindowSolver::exhaustive;
  CHECK_THROWS_AS(plan_window(g, cfg), WindowOverflowError);
  cfg.solver = WindowSolver::dynamic;
  CHECK_NOTHROW(plan_window(g, cfg));
}

TEST_CASE("dynamic programming agrees with exhaustive selection") {
  ToolConfig tool;
  PlannerConfig cfg;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> count(0, 10);
  for (int trial = 0; trial < 300; ++trial) {
    const auto targets = random_targets(rng, count(rng), tool.band(2), 0.8);
    const auto g = build_graph(targets, CropIndex{}, tool, cfg, {0.0, tool.band(2).center()});
    for (auto mode : {SelectionMode::baseline, SelectionMode::biodiv}) {
      cfg.biodiv = mode == SelectionMode::biodiv;
      const auto want = select_trajectory(enumerate_notsp(g, cfg), mode);
      const auto got = solve_window(g, cfg);
      CHECK(got.nodes == want.nodes);
      CHECK(got.c_score == doctest::Approx(want.c_score));
      CHECK(got.k_score == doctest::Approx(want.k_score));
    }
  }
}

TEST_CASE("planner config validation") {
  PlannerConfig cfg;
  cfg.rho = 1.5;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = PlannerConfig{};
  cfg.omega = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = PlannerConfig{};
  cfg.stride_fraction = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  CHECK(parse_observation_mode("rolling") == ObservationMode::rolling);
  CHECK_THROWS(parse_observation_mode("sliding"));
}
