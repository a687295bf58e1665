#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rowplan/assignment.hpp"
#include "rowplan/field_model.hpp"
#include "rowplan/kinematics.hpp"
#include "rowplan/scoring.hpp"
#include "rowplan/trajectory.hpp"

namespace rowplan {

// A target the axis will treat, with the score of the edge that reaches it.
struct PlannedNode {
  PlantId id = 0;
  Point pos;
  double s = 0.0;
  double gamma_score = 0.0;
  double kappa = 0.0;
  friend bool operator==(const PlannedNode&, const PlannedNode&) = default;
};

struct AxisPlan {
  int axis_id = 0;
  Band band;
  Point initial;                             // nozzle position before the row starts
  std::vector<PlannedNode> nodes;            // executed trajectory in row order
  std::vector<PlantId> assigned;             // every target handed to this axis
  std::vector<TrajectoryCandidate> windows;  // selection made per window / per replanning

  double c_score() const;  // mean edge feasibility over the whole trajectory
  double k_score() const;
  double travel_m() const;
};

struct RowPlan {
  ObservationMode mode = ObservationMode::segment;
  bool biodiv = false;
  std::vector<AxisPlan> axes;
};

bool same_trajectories(const RowPlan& a, const RowPlan& b);

// Left edge of observation window i for windows of `length` advancing by
// `stride`: 0, length, length + stride, ... Shared by both observation
// models so that a full-length stride reproduces the segment windows.
double observation_edge(std::size_t i, double length, double stride);

// Cuts the row into disjoint windows of cfg.window_length, assigns and plans
// each independently, and freezes it. The nozzle state carries over.
RowPlan plan_segment_view(const FieldModel& field, const ToolConfig& tool, const PlannerConfig& cfg);

// Receding-horizon planner. Each update receives the tool position and the
// plants that came into view since the last update. Plan nodes already
// executed or due within cfg.commit_time stay fixed; for every axis that
// received new targets the rest of its window is replanned.
class RollingPlanner {
 public:
  RollingPlanner(const ToolConfig& tool, const PlannerConfig& cfg, double start_x = 0.0);

  const std::vector<AxisPlan>& update(double tool_x, std::span<const Plant> new_observations);

  const std::vector<AxisPlan>& plans() const { return axes_; }
  double tool_x() const { return tool_x_; }
  // Plants observed behind this x are rejected.
  double committed_frontier() const;
  RowPlan row_plan() const;

 private:
  struct AxisState {
    std::vector<Plant> pending;  // observed, not yet behind the frontier
  };

  void replan_axis(std::size_t axis, double frontier);

  ToolConfig tool_;
  PlannerConfig cfg_;
  double tool_x_;
  CropIndex crops_;
  std::vector<AxisPlan> axes_;
  std::vector<AxisState> state_;
};

// Drives a RollingPlanner over the whole row, one update per stride.
RowPlan plan_rolling_view(const FieldModel& field, const ToolConfig& tool, const PlannerConfig& cfg);

// Dispatches on cfg.mode.
RowPlan plan_row(const FieldModel& field, const ToolConfig& tool, const PlannerConfig& cfg);

std::string dump_plan(const RowPlan& plan);
RowPlan parse_plan(std::string_view json_text);
void save_plan(const RowPlan& plan, const std::filesystem::path& path);
RowPlan load_plan(const std::filesystem::path& path);

}  // namespace rowplan
