#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rowplan/field_model.hpp"
#include "rowplan/kinematics.hpp"
#include "rowplan/planner.hpp"

namespace rowplan {

struct SimConfig {
  double noise_sigma = 0.0;         // lateral actuation noise, meters
  double accurate_radius = 0.01;
  double partial_radius = 0.025;    // footprint / 2
  double crop_safety_radius = 0.03;
  double detection_withhold = 0.0;  // probability a weed never reaches the planner
  std::uint64_t seed = 0;
};

void validate(const SimConfig& sim, const ToolConfig& tool);

enum class HitClass { accurate, partial, missed };
std::string_view to_string(HitClass c);

HitClass classify_hit(double offset, const SimConfig& sim);

struct RunMetrics {
  std::size_t total_weeds = 0;
  std::size_t accurate_hits = 0;
  std::size_t partial_hits = 0;
  std::size_t missed = 0;
  std::size_t missed_planning = 0;   // handed to the planner but never scheduled
  std::size_t missed_detection = 0;  // withheld from the planner
  std::size_t crop_false_hits = 0;
  double loss_pct = 0.0;
  std::vector<double> per_axis_distance;
  double axis_distance_mean = 0.0;
  double axis_distance_std = 0.0;  // population std over axes
  // Treatment counts per priority level (accurate + partial).
  std::size_t high_total = 0;
  std::size_t high_treated = 0;
  std::size_t low_total = 0;
  std::size_t low_treated = 0;

  double high_rate_pct() const;
  double low_rate_pct() const;
  bool conserves() const { return accurate_hits + partial_hits + missed == total_weeds; }
  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

// Copy of the field the planner gets to see: each weed is withheld with
// probability sim.detection_withhold (deterministic in sim.seed).
FieldModel observe_field(const FieldModel& field, const SimConfig& sim);

// Executes the per-axis plans against the ground-truth field. Sprays fire at
// each planned node's entry time; the nozzle must have covered the lateral
// move at no more than theta. Throws KinematicViolation otherwise.
RunMetrics simulate_run(const FieldModel& field, const RowPlan& plan, const ToolConfig& tool, const SimConfig& sim);

// Fixed-rate nozzle trace for plotting: per sample, tool x and each axis y.
struct TraceSample {
  double t = 0.0;
  double tool_x = 0.0;
  std::vector<double> axis_y;
};
std::vector<TraceSample> trace_run(const RowPlan& plan, const ToolConfig& tool, double rate_hz = 1000.0);

struct MetricSummary {
  std::size_t runs = 0;
  double loss_mean = 0.0;
  double loss_std = 0.0;  // sample std, 0 for a single run
  double distance_mean = 0.0;
  double distance_std = 0.0;
  // Treatment rates average over the runs that contain weeds of that priority.
  std::size_t high_total = 0;
  std::size_t low_total = 0;
  double high_rate_mean = 0.0;
  double low_rate_mean = 0.0;
};

// Throws DomainError on an empty list.
MetricSummary aggregate_metrics(std::span<const RunMetrics> runs);

}  // namespace rowplan
