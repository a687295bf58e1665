#pragma once

#include <span>
#include <vector>

#include "rowplan/field_model.hpp"
#include "rowplan/kinematics.hpp"

namespace rowplan {

// Targets owned by one weeding axis, in row order.
struct AxisTargets {
  int axis_id = 0;
  Band band;
  std::vector<Plant> targets;

  std::vector<PlantId> ids() const;
};

enum class AssignmentStrategy { static_division, distance_based, dynamic_division };

// Static work-space division: axis i owns the half-open lateral band
// [i*W/H, (i+1)*W/H). Crops are dropped; every weed lands in exactly one
// band. Throws AssignmentError for a plant outside [0, W).
std::vector<AxisTargets> assign_static(std::span<const Plant> window, const ToolConfig& tool);

// Dispatch by strategy. Only the static division is implemented; the other
// two raise NotImplementedError.
std::vector<AxisTargets> assign(AssignmentStrategy strategy, std::span<const Plant> window, const ToolConfig& tool);

}  // namespace rowplan
