#include "rowplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "rowplan/errors.hpp"
#include "rowplan/scoring.hpp"

namespace rowplan {

namespace {

// Slack allowed when checking axis speed against theta, seconds.
constexpr double kTimingTolerance = 1e-9;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

void validate(const SimConfig& sim, const ToolConfig& tool) {
  if (!(sim.noise_sigma >= 0.0)) throw ValidationError("noise_sigma", "must be >= 0");
  if (!(sim.accurate_radius >= 0.0)) throw ValidationError("accurate_radius", "must be >= 0");
  if (!(sim.partial_radius >= sim.accurate_radius)) {
    throw ValidationError("partial_radius", "must be >= accurate_radius");
  }
  if (!(sim.partial_radius <= tool.footprint)) throw ValidationError("partial_radius", "must be <= footprint");
  if (!(sim.crop_safety_radius >= 0.0)) throw ValidationError("crop_safety_radius", "must be >= 0");
  if (!(sim.detection_withhold >= 0.0 && sim.detection_withhold <= 1.0)) {
    throw ValidationError("detection_withhold", "must lie in [0, 1]");
  }
}

std::string_view to_string(HitClass c) {
  switch (c) {
    case HitClass::accurate:
      return "accurate";
    case HitClass::partial:
      return "partial";
    case HitClass::missed:
      return "missed";
  }
  return "missed";
}

HitClass classify_hit(double offset, const SimConfig& sim) {
  if (!(offset >= 0.0)) throw DomainError("hit offset must be >= 0");
  if (offset <= sim.accurate_radius) return HitClass::accurate;
  if (offset <= sim.partial_radius) return HitClass::partial;
  return HitClass::missed;
}

double RunMetrics::high_rate_pct() const { return pct(high_treated, high_total); }
double RunMetrics::low_rate_pct() const { return pct(low_treated, low_total); }

FieldModel observe_field(const FieldModel& field, const SimConfig& sim) {
  if (sim.detection_withhold <= 0.0) return field;
  auto rng = make_rng(sim.seed, 7u);
  std::bernoulli_distribution withhold(sim.detection_withhold);
  std::vector<Plant> seen;
  seen.reserve(field.plants().size());
  for (const auto& p : field.plants()) {
    if (p.is_weed() && withhold(rng)) continue;
    seen.push_back(p);
  }
  return FieldModel(field.spec(), std::move(seen));
}

RunMetrics simulate_run(const FieldModel& field, const RowPlan& plan, const ToolConfig& tool, const SimConfig& sim) {
  validate(tool);
  validate(sim, tool);

  std::unordered_map<PlantId, const Plant*> by_id;
  for (const auto& p : field.plants()) by_id.emplace(p.id, &p);
  const CropIndex crops(field.plants());

  std::unordered_set<PlantId> assigned;
  for (const auto& axis : plan.axes) assigned.insert(axis.assigned.begin(), axis.assigned.end());

  auto rng = make_rng(sim.seed, 3u);
  std::normal_distribution<double> noise(0.0, 1.0);

  RunMetrics m;
  std::unordered_map<PlantId, HitClass> outcome;
  for (const auto& axis : plan.axes) {
    double x = axis.initial.x;
    double y = axis.initial.y;
    double travelled = 0.0;
    for (const auto& node : axis.nodes) {
      auto it = by_id.find(node.id);
      if (it == by_id.end()) throw DomainError("plan node " + std::to_string(node.id) + " is not in the field");
      const Plant& weed = *it->second;
      if (!weed.is_weed()) throw DomainError("plan node " + std::to_string(node.id) + " is not a weed");
      if (!axis.band.contains(weed.y)) {
        throw KinematicViolation("axis " + std::to_string(axis.axis_id) + " would leave its band to reach plant " +
                                 std::to_string(weed.id));
      }
      if (weed.x < x) {
        throw KinematicViolation("axis " + std::to_string(axis.axis_id) + " plan goes upstream at plant " +
                                 std::to_string(weed.id));
      }
      const double available = (weed.x - x) / tool.gamma - tool.dwell;
      const double needed = std::abs(weed.y - y) / tool.theta;
      if (needed > available + kTimingTolerance) {
        throw KinematicViolation("axis " + std::to_string(axis.axis_id) + " needs " + std::to_string(needed) +
                                 " s but has " + std::to_string(available) + " s to reach plant " +
                                 std::to_string(weed.id));
      }
      travelled += std::abs(weed.y - y);
      x = weed.x;
      y = weed.y;

      const double spray_y = weed.y + (sim.noise_sigma > 0.0 ? sim.noise_sigma * noise(rng) : 0.0);
      const HitClass hit = classify_hit(std::abs(spray_y - weed.y), sim);
      auto [slot, inserted] = outcome.emplace(weed.id, hit);
      if (!inserted && static_cast<int>(hit) < static_cast<int>(slot->second)) slot->second = hit;

      if (const Plant* crop = crops.nearest(Point{weed.x, spray_y});
          crop != nullptr && std::hypot(crop->x - weed.x, crop->y - spray_y) <= sim.crop_safety_radius) {
        ++m.crop_false_hits;
      }
    }
    m.per_axis_distance.push_back(travelled);
  }

  for (const auto& p : field.plants()) {
    if (!p.is_weed()) continue;
    ++m.total_weeds;
    const auto it = outcome.find(p.id);
    const HitClass hit = it == outcome.end() ? HitClass::missed : it->second;
    const bool treated = hit != HitClass::missed;
    if (hit == HitClass::accurate) ++m.accurate_hits;
    if (hit == HitClass::partial) ++m.partial_hits;
    if (!treated) {
      ++m.missed;
      if (!assigned.contains(p.id)) {
        ++m.missed_detection;
      } else if (it == outcome.end()) {
        ++m.missed_planning;
      }
    }
    if (p.priority == Priority::high) {
      ++m.high_total;
      if (treated) ++m.high_treated;
    } else {
      ++m.low_total;
      if (treated) ++m.low_treated;
    }
  }
  m.loss_pct = pct(m.missed, m.total_weeds);

  if (!m.per_axis_distance.empty()) {
    double sum = 0.0;
    for (double d : m.per_axis_distance) sum += d;
    m.axis_distance_mean = sum / static_cast<double>(m.per_axis_distance.size());
    double sq = 0.0;
    for (double d : m.per_axis_distance) sq += (d - m.axis_distance_mean) * (d - m.axis_distance_mean);
    m.axis_distance_std = std::sqrt(sq / static_cast<double>(m.per_axis_distance.size()));
  }
  return m;
}

std::vector<TraceSample> trace_run(const RowPlan& plan, const ToolConfig& tool, double rate_hz) {
  if (!(rate_hz > 0.0)) throw DomainError("trace rate must be > 0");
  if (plan.axes.empty()) return {};
  const double x0 = plan.axes.front().initial.x;

  // Per axis: (time the nozzle must be over the node, node y).
  struct Waypoint {
    double t;
    double y;
  };
  std::vector<std::vector<Waypoint>> paths;
  double t_end = 0.0;
  for (const auto& axis : plan.axes) {
    std::vector<Waypoint> w{{(axis.initial.x - x0) / tool.gamma, axis.initial.y}};
    for (const auto& n : axis.nodes) w.push_back({(n.pos.x - x0) / tool.gamma, n.pos.y});
    t_end = std::max(t_end, w.back().t);
    paths.push_back(std::move(w));
  }

  std::vector<TraceSample> out;
  const auto samples = static_cast<std::size_t>(std::floor(t_end * rate_hz)) + 1;
  out.reserve(samples);
  std::vector<std::size_t> seg(paths.size(), 0);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    TraceSample s{t, x0 + tool.gamma * t, {}};
    for (std::size_t a = 0; a < paths.size(); ++a) {
      const auto& w = paths[a];
      while (seg[a] + 1 < w.size() && w[seg[a] + 1].t <= t) ++seg[a];
      if (seg[a] + 1 >= w.size()) {
        s.axis_y.push_back(w.back().y);
        continue;
      }
      // Leave the previous node after the dwell, move at theta, then hold.
      const Waypoint& from = w[seg[a]];
      const Waypoint& to = w[seg[a] + 1];
      const double moving = std::max(0.0, t - from.t - tool.dwell);
      const double step = std::min(std::abs(to.y - from.y), tool.theta * moving);
      s.axis_y.push_back(from.y + std::copysign(step, to.y - from.y));
    }
    out.push_back(std::move(s));
  }
  return out;
}

MetricSummary aggregate_metrics(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw DomainError("aggregate_metrics needs at least one run");
  MetricSummary s;
  s.runs = runs.size();
  const double n = static_cast<double>(runs.size());
  std::size_t high_runs = 0;
  std::size_t low_runs = 0;
  for (const auto& r : runs) {
    s.loss_mean += r.loss_pct;
    s.distance_mean += r.axis_distance_mean;
    s.high_total += r.high_total;
    s.low_total += r.low_total;
    if (r.high_total > 0) {
      s.high_rate_mean += r.high_rate_pct();
      ++high_runs;
    }
    if (r.low_total > 0) {
      s.low_rate_mean += r.low_rate_pct();
      ++low_runs;
    }
  }
  s.loss_mean /= n;
  s.distance_mean /= n;
  if (high_runs > 0) s.high_rate_mean /= static_cast<double>(high_runs);
  if (low_runs > 0) s.low_rate_mean /= static_cast<double>(low_runs);

  if (runs.size() > 1) {
    double sq = 0.0;
    for (const auto& r : runs) sq += (r.loss_pct - s.loss_mean) * (r.loss_pct - s.loss_mean);
    s.loss_std = std::sqrt(sq / (n - 1.0));
  }
  // Distance spread is pooled over every axis of every run (runs share the
  // axis count), so a single run reports its own across-axis spread.
  double pooled = 0.0;
  for (const auto& r : runs) {
    const double shift = r.axis_distance_mean - s.distance_mean;
    pooled += r.axis_distance_std * r.axis_distance_std + shift * shift;
  }
  s.distance_std = std::sqrt(pooled / n);
  return s;
}

}  // namespace rowplan
