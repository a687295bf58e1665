#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rowplan/assignment.hpp"
#include "rowplan/field_model.hpp"
#include "rowplan/kinematics.hpp"
#include "rowplan/scoring.hpp"

namespace rowplan {

enum class ObservationMode { segment, rolling };
enum class SelectionMode { baseline, biodiv };
// `dynamic` is the exact DP selector; `exhaustive` lists every feasible
// trajectory and is bounded by max_window_targets.
enum class WindowSolver { dynamic, exhaustive };

std::string_view to_string(ObservationMode mode);
std::string_view to_string(SelectionMode mode);
std::string_view to_string(WindowSolver solver);
ObservationMode parse_observation_mode(std::string_view text);
WindowSolver parse_window_solver(std::string_view text);

struct PlannerConfig {
  double omega = 10.0;  // logistic steepness, 1/s
  double rho = 0.6;     // per-edge feasibility cutoff
  ObservationMode mode = ObservationMode::segment;
  bool biodiv = false;
  double window_length = 1.0;  // camera view length, meters
  double stride_fraction = 0.5;
  std::size_t max_window_targets = 12;
  double commit_time = 0.2;  // seconds ahead of the tool that stay frozen in rolling mode
  WindowSolver solver = WindowSolver::dynamic;
  HarmfulnessContext harm;

  SelectionMode selection() const { return biodiv ? SelectionMode::biodiv : SelectionMode::baseline; }
  double stride() const { return stride_fraction * window_length; }
};

void validate(const PlannerConfig& cfg);

inline constexpr PlantId kStartNodeId = -1;

struct GraphNode {
  PlantId id = kStartNodeId;
  Point pos;
  double kappa = 0.0;
};

struct FeasibilityEdge {
  PlantId from_id = kStartNodeId;
  PlantId to_id = kStartNodeId;
  double s = 0.0;            // favorability, seconds
  double gamma_score = 0.5;  // logistic feasibility
  double dy = 0.0;           // lateral travel of the edge, meters
};

// Directed acyclic graph over one axis window. Node 0 is the virtual start
// (the nozzle's current position); nodes 1..n are targets in row order.
// Edges run from the start to every target and from each target to every
// target strictly further along x.
class FeasibilityGraph {
 public:
  FeasibilityGraph() = default;
  FeasibilityGraph(std::vector<GraphNode> nodes, std::vector<FeasibilityEdge> edges);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<FeasibilityEdge>& edges() const { return edges_; }
  std::size_t target_count() const { return nodes_.empty() ? 0 : nodes_.size() - 1; }
  const FeasibilityEdge* edge(std::size_t from, std::size_t to) const;
  std::optional<std::size_t> index_of(PlantId id) const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<FeasibilityEdge> edges_;
  std::vector<int> matrix_;  // dense (from, to) -> edge index, -1 if absent
};

FeasibilityGraph build_graph(std::span<const Plant> targets, const CropIndex& crops, const ToolConfig& tool,
                             const PlannerConfig& cfg, Point start);
FeasibilityGraph build_graph(const AxisTargets& targets, const FieldModel& field, const ToolConfig& tool,
                             const PlannerConfig& cfg, Point start);

// One ordered visit list for an axis. `nodes` excludes the virtual start.
struct TrajectoryCandidate {
  int axis_id = 0;
  std::vector<PlantId> nodes;
  double c_score = 0.0;   // mean edge feasibility, 0 if any edge is below rho
  double k_score = 0.0;   // total harmfulness of the visited weeds
  double travel_m = 0.0;  // lateral travel including the start edge

  bool empty() const { return nodes.empty(); }
};

// Lists the empty trajectory plus every path from the start whose edges all
// clear rho. Throws WindowOverflowError above cfg.max_window_targets.
std::vector<TrajectoryCandidate> enumerate_notsp(const FeasibilityGraph& graph, const PlannerConfig& cfg);

// Mean of the path's edge feasibilities (start edge included), or 0 when an
// edge is missing or scores below rho. The empty trajectory scores 0.
double score_trajectory(const TrajectoryCandidate& t, const FeasibilityGraph& graph, double rho);

// Baseline: most nodes, then highest C. Biodiv: highest K among feasible
// candidates, then highest C. Remaining ties: less lateral travel, lower
// first-node id, lexicographically smaller id sequence.
TrajectoryCandidate select_trajectory(std::span<const TrajectoryCandidate> candidates, SelectionMode mode);

// True when `a` ranks strictly ahead of `b` under the selection order.
bool ranks_ahead(const TrajectoryCandidate& a, const TrajectoryCandidate& b, SelectionMode mode);

// Exact optimum of select_trajectory(enumerate_notsp(graph)) computed by
// dynamic programming over the DAG, without the size cap.
TrajectoryCandidate solve_window(const FeasibilityGraph& graph, const PlannerConfig& cfg);

// Dispatches on cfg.solver.
TrajectoryCandidate plan_window(const FeasibilityGraph& graph, const PlannerConfig& cfg);

}  // namespace rowplan
