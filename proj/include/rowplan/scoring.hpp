#pragma once

#include <span>
#include <vector>

#include "rowplan/field_model.hpp"
#include "rowplan/kinematics.hpp"

namespace rowplan {

// Time slack in seconds for an axis to cover d.dy while the robot covers
// d.dx, minus the configured dwell: dx/gamma - dy/theta - dwell.
double favorability(const Displacement& d, const ToolConfig& tool);

// Logistic squashing of the slack: 1 / (1 + exp(-omega * s)).
// Exactly 0.5 at s == 0 and strictly increasing in s.
double feasibility(double s, double omega);

struct HarmfulnessContext {
  double reference_distance = 0.5;       // meters, used when the field has no crops
  double nominal_crop_area_mm2 = 1000.0; // crop area used with the reference distance
  double low_weight = 0.1;
  double high_weight = 1.0;
  double max_kappa = 1e6;

  double weight(Priority p) const { return p == Priority::low ? low_weight : high_weight; }
};

void validate(const HarmfulnessContext& ctx);

struct Harmfulness {
  double kappa = 0.0;
  bool degenerate = false;  // clamped at max_kappa (weed on a crop center)
};

// Nearest-crop lookup over crops sorted by x. Crops may be appended in
// non-decreasing x as they are observed.
class CropIndex {
 public:
  CropIndex() = default;
  explicit CropIndex(std::span<const Plant> plants);

  void add(const Plant& crop);
  bool empty() const { return crops_.empty(); }
  std::size_t size() const { return crops_.size(); }
  // Returns nullptr when empty.
  const Plant* nearest(Point at) const;

 private:
  std::vector<Plant> crops_;
};

// Threat score of a weed: (area_w * beta_w) / (area_p * distance(w, p)) with
// p the nearest crop. beta_w is the species beta scaled by the priority
// weight. Without crops the nominal crop area and reference distance stand in.
Harmfulness harmfulness(const Plant& weed, std::span<const Plant> crops, const HarmfulnessContext& ctx);
Harmfulness harmfulness(const Plant& weed, const CropIndex& crops, const HarmfulnessContext& ctx);

}  // namespace rowplan
