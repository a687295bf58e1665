#include "rowplan/kinematics.hpp"

#include <cmath>
#include <string>

#include "rowplan/errors.hpp"

namespace rowplan {

namespace {

double band_edge(const ToolConfig& tool, int i) {
  if (i >= tool.heads) return tool.lateral_width;
  return tool.lateral_width * static_cast<double>(i) / static_cast<double>(tool.heads);
}

}  // namespace

Band ToolConfig::band(int axis) const {
  if (axis < 0 || axis >= heads) throw DomainError("axis index " + std::to_string(axis) + " out of range");
  return Band{band_edge(*this, axis), band_edge(*this, axis + 1)};
}

int ToolConfig::axis_for(double y) const {
  if (!(y >= 0.0 && y < lateral_width)) {
    throw AssignmentError("lateral position " + std::to_string(y) + " outside [0, " + std::to_string(lateral_width) +
                          ")");
  }
  int i = static_cast<int>(std::floor(y * heads / lateral_width));
  if (i >= heads) i = heads - 1;
  if (i < 0) i = 0;
  while (i > 0 && y < band_edge(*this, i)) --i;
  while (i + 1 < heads && y >= band_edge(*this, i + 1)) ++i;
  return i;
}

void validate(const ToolConfig& tool) {
  if (tool.heads < 1) throw ValidationError("heads", "must be >= 1");
  if (!(tool.lateral_width > 0.0) || !std::isfinite(tool.lateral_width)) {
    throw ValidationError("lateral_width", "must be > 0");
  }
  if (!(tool.gamma > 0.0) || !std::isfinite(tool.gamma)) throw ValidationError("gamma", "must be > 0");
  if (!(tool.theta > 0.0) || !std::isfinite(tool.theta)) throw ValidationError("theta", "must be > 0");
  if (!(tool.footprint > 0.0)) throw ValidationError("footprint_m", "must be > 0");
  if (!(tool.dwell >= 0.0)) throw ValidationError("dwell_s", "must be >= 0");
  if (!(tool.max_accel >= 0.0)) throw ValidationError("max_accel", "must be >= 0");
}

Displacement displacement(Point from, Point to) {
  if (to.x < from.x) {
    throw OrderingError("edge points upstream: from x=" + std::to_string(from.x) + " to x=" + std::to_string(to.x));
  }
  return Displacement{to.x - from.x, std::abs(to.y - from.y)};
}

double entry_time(double plant_x, double tool_x, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("entry_time requires gamma > 0");
  if (plant_x < tool_x) {
    throw AlreadyPassedError("plant at x=" + std::to_string(plant_x) + " is behind the tool at x=" +
                             std::to_string(tool_x));
  }
  return (plant_x - tool_x) / gamma;
}

}  // namespace rowplan
