#include "rowplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rowplan/errors.hpp"

namespace rowplan {

using ordered_json = nlohmann::ordered_json;

double AxisPlan::c_score() const {
  if (nodes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& n : nodes) sum += n.gamma_score;
  return sum / static_cast<double>(nodes.size());
}

double AxisPlan::k_score() const {
  double sum = 0.0;
  for (const auto& n : nodes) sum += n.kappa;
  return sum;
}

double AxisPlan::travel_m() const {
  double total = 0.0;
  double y = initial.y;
  for (const auto& n : nodes) {
    total += std::abs(n.pos.y - y);
    y = n.pos.y;
  }
  return total;
}

bool same_trajectories(const RowPlan& a, const RowPlan& b) {
  if (a.axes.size() != b.axes.size()) return false;
  for (std::size_t i = 0; i < a.axes.size(); ++i) {
    const auto& na = a.axes[i].nodes;
    const auto& nb = b.axes[i].nodes;
    if (na.size() != nb.size()) return false;
    for (std::size_t k = 0; k < na.size(); ++k) {
      if (na[k].id != nb[k].id) return false;
    }
  }
  return true;
}

double observation_edge(std::size_t i, double length, double stride) {
  if (i == 0) return 0.0;
  return length + static_cast<double>(i - 1) * stride;
}

namespace {

std::vector<AxisPlan> empty_axes(const ToolConfig& tool, double start_x) {
  std::vector<AxisPlan> axes(static_cast<std::size_t>(tool.heads));
  for (int i = 0; i < tool.heads; ++i) {
    auto& a = axes[static_cast<std::size_t>(i)];
    a.axis_id = i;
    a.band = tool.band(i);
    a.initial = Point{start_x, a.band.center()};
  }
  return axes;
}

Point nozzle_position(const AxisPlan& axis) { return axis.nodes.empty() ? axis.initial : axis.nodes.back().pos; }

// Appends the selected trajectory to the axis, copying edge scores from the
// graph it was selected on.
void append_selection(AxisPlan& axis, const FeasibilityGraph& graph, TrajectoryCandidate selected) {
  selected.axis_id = axis.axis_id;
  std::size_t prev = 0;
  for (PlantId id : selected.nodes) {
    const std::size_t idx = *graph.index_of(id);
    const FeasibilityEdge* e = graph.edge(prev, idx);
    const GraphNode& node = graph.nodes()[idx];
    axis.nodes.push_back(PlannedNode{id, node.pos, e->s, e->gamma_score, node.kappa});
    prev = idx;
  }
  axis.windows.push_back(std::move(selected));
}

void reject_behind_start(const Plant& p, double start_x) {
  if (p.x < start_x) {
    throw AlreadyPassedError("plant " + std::to_string(p.id) + " at x=" + std::to_string(p.x) +
                             " lies behind the row start");
  }
}

}  // namespace

RowPlan plan_segment_view(const FieldModel& field, const ToolConfig& tool, const PlannerConfig& cfg) {
  validate(tool);
  validate(cfg);
  RowPlan plan{ObservationMode::segment, cfg.biodiv, empty_axes(tool, 0.0)};

  CropIndex crops;
  const auto& plants = field.plants();
  const double end = field.extent();
  const double length = cfg.window_length;
  std::size_t cursor = 0;
  std::vector<Plant> window;

  for (std::size_t k = 0; observation_edge(k, length, length) < end; ++k) {
    const double hi = observation_edge(k + 1, length, length);
    window.clear();
    for (; cursor < plants.size() && plants[cursor].x < hi; ++cursor) {
      reject_behind_start(plants[cursor], 0.0);
      window.push_back(plants[cursor]);
      if (plants[cursor].is_crop()) crops.add(plants[cursor]);
    }
    const auto assigned = assign_static(window, tool);
    for (auto& axis : plan.axes) {
      const auto& targets = assigned[static_cast<std::size_t>(axis.axis_id)].targets;
      for (const auto& t : targets) axis.assigned.push_back(t.id);
      const FeasibilityGraph graph = build_graph(targets, crops, tool, cfg, nozzle_position(axis));
      append_selection(axis, graph, plan_window(graph, cfg));
    }
  }
  return plan;
}

RollingPlanner::RollingPlanner(const ToolConfig& tool, const PlannerConfig& cfg, double start_x)
    : tool_(tool), cfg_(cfg), tool_x_(-std::numeric_limits<double>::infinity()) {
  validate(tool_);
  validate(cfg_);
  axes_ = empty_axes(tool_, start_x);
  state_.resize(axes_.size());
}

double RollingPlanner::committed_frontier() const { return tool_x_ + tool_.gamma * cfg_.commit_time; }

const std::vector<AxisPlan>& RollingPlanner::update(double tool_x, std::span<const Plant> new_observations) {
  if (tool_x < tool_x_) {
    throw OrderingError("tool moved backwards from x=" + std::to_string(tool_x_) + " to x=" + std::to_string(tool_x));
  }
  const double frontier = tool_x + tool_.gamma * cfg_.commit_time;
  for (const auto& p : new_observations) {
    if (p.x < frontier) {
      throw AlreadyPassedError("observation " + std::to_string(p.id) + " at x=" + std::to_string(p.x) +
                               " is behind the committed frontier x=" + std::to_string(frontier));
    }
    reject_behind_start(p, axes_.front().initial.x);
  }
  tool_x_ = tool_x;

  for (const auto& p : new_observations) {
    if (p.is_crop()) crops_.add(p);
  }
  const auto assigned = assign_static(new_observations, tool_);
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto& targets = assigned[i].targets;
    if (targets.empty()) continue;
    for (const auto& t : targets) {
      axes_[i].assigned.push_back(t.id);
      state_[i].pending.push_back(t);
    }
    replan_axis(i, frontier);
  }
  return axes_;
}

void RollingPlanner::replan_axis(std::size_t axis, double frontier) {
  AxisPlan& plan = axes_[axis];
  auto& pending = state_[axis].pending;

  const auto first_open =
      std::find_if(plan.nodes.begin(), plan.nodes.end(), [&](const PlannedNode& n) { return n.pos.x >= frontier; });
  plan.nodes.erase(first_open, plan.nodes.end());
  std::erase_if(pending, [&](const Plant& p) { return p.x < frontier; });

  const FeasibilityGraph graph = build_graph(pending, crops_, tool_, cfg_, nozzle_position(plan));
  append_selection(plan, graph, plan_window(graph, cfg_));
}

RowPlan RollingPlanner::row_plan() const { return RowPlan{ObservationMode::rolling, cfg_.biodiv, axes_}; }

RowPlan plan_rolling_view(const FieldModel& field, const ToolConfig& tool, const PlannerConfig& cfg) {
  RollingPlanner planner(tool, cfg, 0.0);
  const auto& plants = field.plants();
  const double end = field.extent();
  const double length = cfg.window_length;
  const double stride = cfg.stride();
  // The replannable window [tool + commit distance, horizon) is one view long.
  const double lag = length + tool.gamma * cfg.commit_time;
  std::size_t cursor = 0;
  std::vector<Plant> observed;

  for (std::size_t i = 0; observation_edge(i, length, stride) < end; ++i) {
    const double horizon = observation_edge(i + 1, length, stride);
    observed.clear();
    for (; cursor < plants.size() && plants[cursor].x < horizon; ++cursor) observed.push_back(plants[cursor]);
    planner.update(horizon - lag, observed);
  }
  return planner.row_plan();
}

RowPlan plan_row(const FieldModel& field, const ToolConfig& tool, const PlannerConfig& cfg) {
  return cfg.mode == ObservationMode::segment ? plan_segment_view(field, tool, cfg)
                                              : plan_rolling_view(field, tool, cfg);
}

// ---------------------------------------------------------------------------
// Plan files

std::string dump_plan(const RowPlan& plan) {
  ordered_json axes = ordered_json::array();
  for (const auto& a : plan.axes) {
    ordered_json nodes = ordered_json::array();
    for (const auto& n : a.nodes) {
      nodes.push_back(ordered_json{{"id", n.id},
                                   {"x_m", n.pos.x},
                                   {"y_m", n.pos.y},
                                   {"s", n.s},
                                   {"gamma", n.gamma_score},
                                   {"kappa", n.kappa}});
    }
    axes.push_back(ordered_json{{"axis_id", a.axis_id},
                                {"band", {a.band.lo, a.band.hi}},
                                {"start", {{"x_m", a.initial.x}, {"y_m", a.initial.y}}},
                                {"c_score", a.c_score()},
                                {"k_score", a.k_score()},
                                {"travel_m", a.travel_m()},
                                {"nodes", nodes},
                                {"assigned", a.assigned}});
  }
  ordered_json doc{{"mode", to_string(plan.mode)}, {"biodiv", plan.biodiv}, {"axes", axes}};
  return doc.dump(1) + "\n";
}

namespace {

double num(const ordered_json& j, const char* key, const std::string& at) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw ParseError(at + "." + key + ": expected a number");
  return it->get<double>();
}

}  // namespace

RowPlan parse_plan(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed plan JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("plan: top level must be an object");
  RowPlan plan;
  try {
    plan.mode = parse_observation_mode(doc.at("mode").get<std::string>());
    plan.biodiv = doc.at("biodiv").get<bool>();
    const auto& axes = doc.at("axes");
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const std::string at = "axes[" + std::to_string(i) + "]";
      const auto& aj = axes[i];
      AxisPlan a;
      a.axis_id = aj.at("axis_id").get<int>();
      a.band = Band{aj.at("band").at(0).get<double>(), aj.at("band").at(1).get<double>()};
      a.initial = Point{num(aj.at("start"), "x_m", at + ".start"), num(aj.at("start"), "y_m", at + ".start")};
      const auto& nodes = aj.at("nodes");
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::string nat = at + ".nodes[" + std::to_string(k) + "]";
        const auto& nj = nodes[k];
        a.nodes.push_back(PlannedNode{nj.at("id").get<PlantId>(), Point{num(nj, "x_m", nat), num(nj, "y_m", nat)},
                                      num(nj, "s", nat), num(nj, "gamma", nat), num(nj, "kappa", nat)});
      }
      a.assigned = aj.at("assigned").get<std::vector<PlantId>>();
      plan.axes.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
  return plan;
}

void save_plan(const RowPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write plan file " + path.string());
  out << dump_plan(plan);
}

RowPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open plan file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_plan(buffer.str());
}

}  // namespace rowplan
