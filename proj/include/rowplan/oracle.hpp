#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rowplan/field_model.hpp"
#include "rowplan/kinematics.hpp"
#include "rowplan/trajectory.hpp"

// Brute-force references used to check the planner and the analytic reach
// probability. Nothing here calls into the planner's scoring code.
namespace rowplan::oracle {

inline constexpr std::size_t kMaxTargets = 8;

struct OracleResult {
  std::size_t best_count = 0;
  double best_c = 0.0;
  double best_k = 0.0;
  double best_travel = 0.0;
  std::vector<PlantId> best_nodes;
  std::size_t sequences_examined = 0;
};

// Tries every ordered subset of `targets` (no pruning), keeps those that move
// strictly downstream and clear cfg.rho on every edge, and returns the best
// under the planner's selection order. Throws SizeError above kMaxTargets.
OracleResult brute_force_plan(std::span<const Plant> targets, std::span<const Plant> crops, Point start,
                              const ToolConfig& tool, const PlannerConfig& cfg, SelectionMode mode);

// Fraction of `samples` exponential gaps (rate eta) with dx/dy > gamma/theta.
// Requires samples >= 10^4.
double monte_carlo_reach(double delta_y, double gamma, double theta, double eta, std::size_t samples,
                         std::uint64_t seed = 0);

}  // namespace rowplan::oracle
