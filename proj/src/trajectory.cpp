#include "rowplan/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rowplan/errors.hpp"

namespace rowplan {

std::string_view to_string(ObservationMode mode) { return mode == ObservationMode::segment ? "segment" : "rolling"; }

std::string_view to_string(SelectionMode mode) { return mode == SelectionMode::baseline ? "baseline" : "biodiv"; }

std::string_view to_string(WindowSolver solver) { return solver == WindowSolver::dynamic ? "dynamic" : "exhaustive"; }

ObservationMode parse_observation_mode(std::string_view text) {
  if (text == "segment") return ObservationMode::segment;
  if (text == "rolling") return ObservationMode::rolling;
  throw ConfigError("mode", "expected segment|rolling, got '" + std::string(text) + "'");
}

WindowSolver parse_window_solver(std::string_view text) {
  if (text == "dynamic") return WindowSolver::dynamic;
  if (text == "exhaustive") return WindowSolver::exhaustive;
  throw ConfigError("solver", "expected dynamic|exhaustive, got '" + std::string(text) + "'");
}

void validate(const PlannerConfig& cfg) {
  if (!(cfg.omega > 0.0) || !std::isfinite(cfg.omega)) throw ValidationError("omega", "must be > 0");
  if (!(cfg.rho > 0.5 && cfg.rho < 1.0)) throw ValidationError("rho", "must lie in (0.5, 1)");
  if (!(cfg.window_length > 0.0) || !std::isfinite(cfg.window_length)) {
    throw ValidationError("window_length", "must be > 0");
  }
  if (!(cfg.stride_fraction > 0.0 && cfg.stride_fraction <= 1.0)) {
    throw ValidationError("stride_fraction", "must lie in (0, 1]");
  }
  if (cfg.max_window_targets < 1) throw ValidationError("max_window_targets", "must be >= 1");
  if (!(cfg.commit_time >= 0.0)) throw ValidationError("commit_time", "must be >= 0");
  validate(cfg.harm);
}

// ---------------------------------------------------------------------------
// Graph

FeasibilityGraph::FeasibilityGraph(std::vector<GraphNode> nodes, std::vector<FeasibilityEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const std::size_t n = nodes_.size();
  matrix_.assign(n * n, -1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto from = index_of(edges_[e].from_id);
    const auto to = index_of(edges_[e].to_id);
    if (!from || !to) throw DomainError("edge references an unknown node");
    matrix_[*from * n + *to] = static_cast<int>(e);
  }
}

const FeasibilityEdge* FeasibilityGraph::edge(std::size_t from, std::size_t to) const {
  const std::size_t n = nodes_.size();
  if (from >= n || to >= n) return nullptr;
  const int e = matrix_[from * n + to];
  return e < 0 ? nullptr : &edges_[static_cast<std::size_t>(e)];
}

std::optional<std::size_t> FeasibilityGraph::index_of(PlantId id) const {
  if (id == kStartNodeId) {
    if (nodes_.empty()) return std::nullopt;
    return 0;
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return i;
  }
  return std::nullopt;
}

FeasibilityGraph build_graph(std::span<const Plant> targets, const CropIndex& crops, const ToolConfig& tool,
                             const PlannerConfig& cfg, Point start) {
  std::vector<Plant> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end(), row_order_less);

  std::vector<GraphNode> nodes;
  nodes.reserve(sorted.size() + 1);
  nodes.push_back(GraphNode{kStartNodeId, start, 0.0});
  for (const auto& t : sorted) {
    nodes.push_back(GraphNode{t.id, Point{t.x, t.y}, harmfulness(t, crops, cfg.harm).kappa});
  }

  auto make_edge = [&](const GraphNode& a, const GraphNode& b) {
    const Displacement d = displacement(a.pos, b.pos);
    const double s = favorability(d, tool);
    return FeasibilityEdge{a.id, b.id, s, feasibility(s, cfg.omega), d.dy};
  };

  std::vector<FeasibilityEdge> edges;
  const std::size_t n = sorted.size();
  edges.reserve(n * (n + 1) / 2);
  for (std::size_t j = 1; j < nodes.size(); ++j) edges.push_back(make_edge(nodes[0], nodes[j]));
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i].pos.x < nodes[j].pos.x) edges.push_back(make_edge(nodes[i], nodes[j]));
    }
  }
  return FeasibilityGraph(std::move(nodes), std::move(edges));
}

FeasibilityGraph build_graph(const AxisTargets& targets, const FieldModel& field, const ToolConfig& tool,
                             const PlannerConfig& cfg, Point start) {
  return build_graph(targets.targets, CropIndex(field.plants()), tool, cfg, start);
}

// ---------------------------------------------------------------------------
// Candidates

namespace {

constexpr double kTieTolerance = 1e-9;

int compare_scores(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  if (std::abs(a - b) <= kTieTolerance * scale) return 0;
  return a < b ? -1 : 1;
}

bool eligible(const TrajectoryCandidate& t) { return t.empty() || t.c_score > 0.0; }

// Scores a path given as graph indices, summing edges in visiting order.
TrajectoryCandidate score_path(const FeasibilityGraph& graph, const std::vector<std::size_t>& path, int axis_id) {
  TrajectoryCandidate t;
  t.axis_id = axis_id;
  double sum = 0.0;
  std::size_t prev = 0;
  for (std::size_t idx : path) {
    const FeasibilityEdge* e = graph.edge(prev, idx);
    sum += e->gamma_score;
    t.travel_m += e->dy;
    t.k_score += graph.nodes()[idx].kappa;
    t.nodes.push_back(graph.nodes()[idx].id);
    prev = idx;
  }
  t.c_score = path.empty() ? 0.0 : sum / static_cast<double>(path.size());
  return t;
}

}  // namespace

std::vector<TrajectoryCandidate> enumerate_notsp(const FeasibilityGraph& graph, const PlannerConfig& cfg) {
  const std::size_t n = graph.target_count();
  if (n > cfg.max_window_targets) throw WindowOverflowError(n, cfg.max_window_targets);

  std::vector<TrajectoryCandidate> out;
  out.emplace_back();
  if (n == 0) return out;

  std::vector<std::size_t> path;
  // Depth-first over the DAG; a prefix whose newest edge falls below rho is
  // cut since every extension of it scores C = 0.
  auto extend = [&](auto&& self, std::size_t from) -> void {
    for (std::size_t to = from + 1; to <= n; ++to) {
      const FeasibilityEdge* e = graph.edge(from, to);
      if (e == nullptr || e->gamma_score < cfg.rho) continue;
      path.push_back(to);
      out.push_back(score_path(graph, path, 0));
      self(self, to);
      path.pop_back();
    }
  };
  extend(extend, 0);
  return out;
}

double score_trajectory(const TrajectoryCandidate& t, const FeasibilityGraph& graph, double rho) {
  if (t.nodes.empty()) return 0.0;
  double sum = 0.0;
  std::size_t prev = 0;
  for (PlantId id : t.nodes) {
    const auto idx = graph.index_of(id);
    if (!idx) return 0.0;
    const FeasibilityEdge* e = graph.edge(prev, *idx);
    if (e == nullptr || e->gamma_score < rho) return 0.0;
    sum += e->gamma_score;
    prev = *idx;
  }
  return sum / static_cast<double>(t.nodes.size());
}

bool ranks_ahead(const TrajectoryCandidate& a, const TrajectoryCandidate& b, SelectionMode mode) {
  if (mode == SelectionMode::baseline) {
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
  } else {
    if (int c = compare_scores(a.k_score, b.k_score); c != 0) return c > 0;
  }
  if (int c = compare_scores(a.c_score, b.c_score); c != 0) return c > 0;
  if (int c = compare_scores(a.travel_m, b.travel_m); c != 0) return c < 0;
  if (!a.nodes.empty() && !b.nodes.empty() && a.nodes.front() != b.nodes.front()) {
    return a.nodes.front() < b.nodes.front();
  }
  return std::lexicographical_compare(a.nodes.begin(), a.nodes.end(), b.nodes.begin(), b.nodes.end());
}

TrajectoryCandidate select_trajectory(std::span<const TrajectoryCandidate> candidates, SelectionMode mode) {
  TrajectoryCandidate best;
  if (!candidates.empty()) best.axis_id = candidates.front().axis_id;
  for (const auto& c : candidates) {
    if (!eligible(c)) continue;
    if (ranks_ahead(c, best, mode)) best = c;
  }
  return best;
}

TrajectoryCandidate solve_window(const FeasibilityGraph& graph, const PlannerConfig& cfg) {
  const std::size_t n = graph.target_count();
  if (n == 0) return TrajectoryCandidate{};
  const bool biodiv = cfg.selection() == SelectionMode::biodiv;
  const auto& nodes = graph.nodes();

  auto usable = [&](std::size_t from, std::size_t to) -> const FeasibilityEdge* {
    const FeasibilityEdge* e = graph.edge(from, to);
    return (e != nullptr && e->gamma_score >= cfg.rho) ? e : nullptr;
  };

  // best[v][k]: best path of exactly k targets starting at target v, ranked
  // by (harmfulness in biodiv mode, feasibility sum, -travel, next id).
  struct Cell {
    bool valid = false;
    double primary = 0.0;
    double sum = 0.0;
    double travel = 0.0;
    std::size_t next = 0;
  };
  const std::size_t stride = n + 1;
  std::vector<Cell> best(stride * stride);
  auto cell = [&](std::size_t v, std::size_t k) -> Cell& { return best[v * stride + k]; };

  for (std::size_t v = n; v >= 1; --v) {
    cell(v, 1) = Cell{true, biodiv ? nodes[v].kappa : 0.0, 0.0, 0.0, 0};
    for (std::size_t k = 2; k <= n - v + 1; ++k) {
      Cell& out = cell(v, k);
      for (std::size_t u = v + 1; u <= n; ++u) {
        const FeasibilityEdge* e = usable(v, u);
        if (e == nullptr) continue;
        const Cell& tail = cell(u, k - 1);
        if (!tail.valid) continue;
        const Cell cand{true, (biodiv ? nodes[v].kappa : 0.0) + tail.primary, e->gamma_score + tail.sum,
                        e->dy + tail.travel, u};
        bool take = !out.valid;
        if (!take) {
          int c = compare_scores(cand.primary, out.primary);
          if (c == 0) c = compare_scores(cand.sum, out.sum);
          if (c == 0) c = -compare_scores(cand.travel, out.travel);
          if (c == 0) c = nodes[u].id < nodes[out.next].id ? 1 : -1;
          take = c > 0;
        }
        if (take) out = cand;
      }
    }
  }

  std::vector<TrajectoryCandidate> finalists;
  finalists.emplace_back();
  std::vector<std::size_t> path;
  for (std::size_t v = 1; v <= n; ++v) {
    if (usable(0, v) == nullptr) continue;
    for (std::size_t k = 1; k <= n - v + 1; ++k) {
      if (!cell(v, k).valid) continue;
      path.clear();
      for (std::size_t at = v, left = k; left > 0; --left) {
        path.push_back(at);
        at = cell(at, left).next;
      }
      finalists.push_back(score_path(graph, path, 0));
    }
  }
  return select_trajectory(finalists, cfg.selection());
}

TrajectoryCandidate plan_window(const FeasibilityGraph& graph, const PlannerConfig& cfg) {
  if (cfg.solver == WindowSolver::exhaustive) return select_trajectory(enumerate_notsp(graph, cfg), cfg.selection());
  return solve_window(graph, cfg);
}

}  // namespace rowplan
