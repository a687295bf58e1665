#include "rowplan/assignment.hpp"

#include <algorithm>

#include "rowplan/errors.hpp"

namespace rowplan {

std::vector<PlantId> AxisTargets::ids() const {
  std::vector<PlantId> out;
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back(t.id);
  return out;
}

std::vector<AxisTargets> assign_static(std::span<const Plant> window, const ToolConfig& tool) {
  validate(tool);
  std::vector<AxisTargets> axes(static_cast<std::size_t>(tool.heads));
  for (int i = 0; i < tool.heads; ++i) {
    axes[static_cast<std::size_t>(i)].axis_id = i;
    axes[static_cast<std::size_t>(i)].band = tool.band(i);
  }
  for (const auto& p : window) {
    if (!(p.y >= 0.0 && p.y < tool.lateral_width)) {
      throw AssignmentError("plant " + std::to_string(p.id) + " at y=" + std::to_string(p.y) +
                            " lies outside the tool width");
    }
    if (!p.is_weed()) continue;
    axes[static_cast<std::size_t>(tool.axis_for(p.y))].targets.push_back(p);
  }
  for (auto& a : axes) std::sort(a.targets.begin(), a.targets.end(), row_order_less);
  return axes;
}

std::vector<AxisTargets> assign(AssignmentStrategy strategy, std::span<const Plant> window, const ToolConfig& tool) {
  switch (strategy) {
    case AssignmentStrategy::static_division:
      return assign_static(window, tool);
    case AssignmentStrategy::distance_based:
      throw NotImplementedError("distance-based target assignment is not implemented; use static division");
    case AssignmentStrategy::dynamic_division:
      throw NotImplementedError("dynamic work-space division is not implemented; use static division");
  }
  throw NotImplementedError("unknown assignment strategy");
}

}  // namespace rowplan
