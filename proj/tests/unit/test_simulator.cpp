#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "rowplan/errors.hpp"
#include "rowplan/simulator.hpp"

using namespace rowplan;
using test::weed;

namespace {

FieldModel field_at(double lambda, std::uint64_t seed) {
  FieldSpec spec;
  spec.lambda = lambda;
  spec.length = 20.0;
  spec.crop_spacing = 0.2;
  spec.seed = seed;
  return generate_field(spec);
}

RowPlan idle_plan(const ToolConfig& tool) {
  RowPlan plan;
  for (int i = 0; i < tool.heads; ++i) {
    AxisPlan a;
    a.axis_id = i;
    a.band = tool.band(i);
    a.initial = {0.0, a.band.center()};
    plan.axes.push_back(a);
  }
  return plan;
}

}  // namespace

TEST_CASE("hit classification radii") {
  SimConfig sim;
  CHECK(classify_hit(0.0, sim) == HitClass::accurate);
  CHECK(classify_hit(0.01, sim) == HitClass::accurate);
  CHECK(classify_hit(0.02, sim) == HitClass::partial);
  CHECK(classify_hit(0.025, sim) == HitClass::partial);
  CHECK(classify_hit(0.04, sim) == HitClass::missed);
  CHECK_THROWS_AS(classify_hit(-0.01, sim), DomainError);
}

TEST_CASE("empty plan loses every weed") {
  ToolConfig tool;
  const FieldModel f = field_at(8.2, 1);
  const RunMetrics m = simulate_run(f, idle_plan(tool), tool, SimConfig{});
  CHECK(m.loss_pct == 100.0);
  CHECK(m.missed == m.total_weeds);
  CHECK(m.axis_distance_mean == 0.0);
  CHECK(m.axis_distance_std == 0.0);
}

TEST_CASE("exact kinematics hit every planned node accurately") {
  ToolConfig tool;
  PlannerConfig cfg;
  const FieldModel f = field_at(22.3, 2);
  const RowPlan plan = plan_row(f, tool, cfg);
  const RunMetrics m = simulate_run(f, plan, tool, SimConfig{});
  std::size_t planned = 0;
  double travel = 0.0;
  for (const auto& a : plan.axes) {
    planned += a.nodes.size();
    travel += a.travel_m();
  }
  CHECK(m.accurate_hits == planned);
  CHECK(m.partial_hits == 0);
  CHECK(m.missed == m.total_weeds - planned);
  CHECK(m.missed_planning == m.missed);
  CHECK(m.conserves());
  CHECK(m.axis_distance_mean == doctest::Approx(travel / 4.0));
}

TEST_CASE("noise produces partial hits and misses but conserves counts") {
  ToolConfig tool;
  PlannerConfig cfg;
  SimConfig sim;
  sim.noise_sigma = 0.015;
  sim.seed = 4;
  const FieldModel f = field_at(8.2, 3);
  const RunMetrics m = simulate_run(f, plan_row(f, tool, cfg), tool, sim);
  CHECK(m.partial_hits > 0);
  CHECK(m.conserves());
  CHECK(m == simulate_run(f, plan_row(f, tool, cfg), tool, sim));
}

TEST_CASE("withheld detections are counted separately") {
  ToolConfig tool;
  PlannerConfig cfg;
  SimConfig sim;
  sim.detection_withhold = 0.3;
  sim.seed = 12;
  const FieldModel truth = field_at(3.1, 6);
  const FieldModel seen = observe_field(truth, sim);
  CHECK(seen.weed_count() < truth.weed_count());
  CHECK(seen.crops().size() == truth.crops().size());
  const RunMetrics m = simulate_run(truth, plan_row(seen, tool, cfg), tool, sim);
  CHECK(m.missed_detection == truth.weed_count() - seen.weed_count());
  CHECK(m.conserves());
}

TEST_CASE("plans that outrun the axis are rejected") {
  ToolConfig tool;
  const FieldModel f(FieldSpec{}, {weed(0, 0.01, 0.0)});
  RowPlan plan = idle_plan(tool);
  plan.axes[0].initial = {0.0, 0.34};
  plan.axes[0].nodes.push_back(PlannedNode{0, {0.01, 0.0}, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(simulate_run(f, plan, tool, SimConfig{}), KinematicViolation);
}

TEST_CASE("sprays near a crop count as crop hits") {
  ToolConfig tool;
  const FieldModel f(FieldSpec{}, {weed(0, 0.5, 0.17), test::crop(1, 0.51, 0.18)});
  RowPlan plan = idle_plan(tool);
  plan.axes[0].nodes.push_back(PlannedNode{0, {0.5, 0.17}, 0.0, 0.0, 0.0});
  plan.axes[0].assigned.push_back(0);
  const RunMetrics m = simulate_run(f, plan, tool, SimConfig{});
  CHECK(m.crop_false_hits == 1);
  CHECK(m.accurate_hits == 1);
}

TEST_CASE("priority counts split treated weeds") {
  ToolConfig tool;
  const FieldModel f(FieldSpec{}, {weed(0, 0.5, 0.17, 400.0, Priority::low), weed(1, 0.6, 0.5, 400.0)});
  RowPlan plan = idle_plan(tool);
  plan.axes[0].nodes.push_back(PlannedNode{0, {0.5, 0.17}, 0.0, 0.0, 0.0});
  const RunMetrics m = simulate_run(f, plan, tool, SimConfig{});
  CHECK(m.low_total == 1);
  CHECK(m.low_treated == 1);
  CHECK(m.high_total == 1);
  CHECK(m.high_treated == 0);
  CHECK(m.low_rate_pct() == 100.0);
  CHECK(m.high_rate_pct() == 0.0);
}

TEST_CASE("trace never exceeds the axis speed limit") {
  ToolConfig tool;
  PlannerConfig cfg;
  cfg.mode = ObservationMode::rolling;
  const RowPlan plan = plan_row(field_at(81.2, 7), tool, cfg);
  const auto trace = trace_run(plan, tool, 2000.0);
  REQUIRE(trace.size() > 2);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    const double dt = trace[k].t - trace[k - 1].t;
    for (std::size_t a = 0; a < trace[k].axis_y.size(); ++a) {
      CHECK(std::abs(trace[k].axis_y[a] - trace[k - 1].axis_y[a]) <= tool.theta * dt + 1e-9);
    }
  }
}

TEST_CASE("aggregate summary") {
  RunMetrics a, b;
  a.total_weeds = b.total_weeds = 10;
  a.loss_pct = 10.0;
  b.loss_pct = 20.0;
  a.per_axis_distance = {1.0, 3.0};
  a.axis_distance_mean = 2.0;
  a.axis_distance_std = 1.0;
  b.per_axis_distance = {4.0, 4.0};
  b.axis_distance_mean = 4.0;
  const std::vector<RunMetrics> both{a, b};
  const MetricSummary s = aggregate_metrics(both);
  CHECK(s.runs == 2);
  CHECK(s.loss_mean == doctest::Approx(15.0));
  CHECK(s.loss_std == doctest::Approx(std::sqrt(50.0)));
  CHECK(s.distance_mean == doctest::Approx(3.0));
  // Population std over the pooled axis distances {1, 3, 4, 4}.
  CHECK(s.distance_std == doctest::Approx(std::sqrt((4.0 + 0.0 + 1.0 + 1.0) / 4.0)));

  const std::vector<RunMetrics> one{a};
  const MetricSummary single = aggregate_metrics(one);
  CHECK(single.loss_mean == 10.0);
  CHECK(single.loss_std == 0.0);
  CHECK(single.distance_mean == 2.0);
  CHECK(single.distance_std == doctest::Approx(1.0));
  CHECK_THROWS_AS(aggregate_metrics(std::vector<RunMetrics>{}), DomainError);
}

TEST_CASE("sim config validation") {
  ToolConfig tool;
  SimConfig sim;
  sim.partial_radius = 0.2;
  CHECK_THROWS_AS(validate(sim, tool), ValidationError);
  sim = SimConfig{};
  sim.detection_withhold = 1.5;
  CHECK_THROWS_AS(validate(sim, tool), ValidationError);
}
