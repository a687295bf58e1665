#pragma once

namespace rowplan {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Lateral interval [lo, hi) owned by one weeding axis.
struct Band {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double y) const { return y >= lo && y < hi; }
  double center() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  friend bool operator==(const Band&, const Band&) = default;
};

// Geometry and motion limits of the multi-head tool. Axes move laterally
// only; the whole tool advances along x at the robot speed.
struct ToolConfig {
  int heads = 4;
  double lateral_width = 1.39;   // total lateral coverage of all bands (weeding width)
  double workspace_depth = 0.36; // along-track depth of the working area, informational
  double footprint = 0.05;       // spray diameter on the ground
  double gamma = 0.5;            // robot speed, m/s
  double theta = 5.0;            // axis speed limit, m/s
  double dwell = 0.0;            // seconds spent per treatment
  // Reserved for a trapezoidal axis profile; 0 means velocity-only (the
  // only model currently implemented). Ignored by scoring and simulation.
  double max_accel = 0.0;

  double band_width() const { return lateral_width / heads; }
  Band band(int axis) const;
  // Axis owning lateral position y; requires 0 <= y < lateral_width.
  int axis_for(double y) const;
};

// Throws ValidationError for the first violated invariant.
void validate(const ToolConfig& tool);

// Downstream separation between two points: dx >= 0 along x, dy absolute.
struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
};

// Throws OrderingError if `to` lies upstream of `from`.
Displacement displacement(Point from, Point to);

// Seconds until the tool line reaches plant_x. Throws AlreadyPassedError
// when the plant is behind the tool.
double entry_time(double plant_x, double tool_x, double gamma);

}  // namespace rowplan
