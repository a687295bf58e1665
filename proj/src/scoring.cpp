#include "rowplan/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rowplan/errors.hpp"

namespace rowplan {

double favorability(const Displacement& d, const ToolConfig& tool) {
  return d.dx / tool.gamma - d.dy / tool.theta - tool.dwell;
}

double feasibility(double s, double omega) {
  if (!(omega > 0.0)) throw DomainError("feasibility requires omega > 0");
  return 1.0 / (1.0 + std::exp(-omega * s));
}

void validate(const HarmfulnessContext& ctx) {
  if (!(ctx.reference_distance > 0.0)) throw ValidationError("reference_distance", "must be > 0");
  if (!(ctx.nominal_crop_area_mm2 > 0.0)) throw ValidationError("nominal_crop_area_mm2", "must be > 0");
  if (!(ctx.low_weight > 0.0)) throw ValidationError("priority_weights.low", "must be > 0");
  if (!(ctx.high_weight > 0.0)) throw ValidationError("priority_weights.high", "must be > 0");
  if (!(ctx.max_kappa > 0.0)) throw ValidationError("max_kappa", "must be > 0");
}

CropIndex::CropIndex(std::span<const Plant> plants) {
  for (const auto& p : plants) {
    if (p.is_crop()) crops_.push_back(p);
  }
  std::sort(crops_.begin(), crops_.end(), row_order_less);
}

void CropIndex::add(const Plant& crop) {
  if (!crop.is_crop()) return;
  if (crops_.empty() || !row_order_less(crop, crops_.back())) {
    crops_.push_back(crop);
  } else {
    crops_.insert(std::upper_bound(crops_.begin(), crops_.end(), crop, row_order_less), crop);
  }
}

const Plant* CropIndex::nearest(Point at) const {
  if (crops_.empty()) return nullptr;
  auto pivot = std::lower_bound(crops_.begin(), crops_.end(), at.x, [](const Plant& c, double x) { return c.x < x; });
  const Plant* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](const Plant& c) {
    const double d = std::hypot(c.x - at.x, c.y - at.y);
    if (d < best_d) {
      best_d = d;
      best = &c;
    }
  };
  for (auto it = pivot; it != crops_.end() && it->x - at.x < best_d; ++it) consider(*it);
  for (auto it = pivot; it != crops_.begin();) {
    --it;
    if (at.x - it->x >= best_d) break;
    consider(*it);
  }
  return best;
}

namespace {

Harmfulness kappa_from(const Plant& weed, const Plant* crop, const HarmfulnessContext& ctx) {
  if (!weed.is_weed()) throw DomainError("harmfulness is defined for weeds only (plant " + std::to_string(weed.id) + ")");
  const double numerator = weed.area_mm2 * weed.beta * ctx.weight(weed.priority);
  double crop_area = ctx.nominal_crop_area_mm2;
  double distance = ctx.reference_distance;
  if (crop != nullptr) {
    crop_area = crop->area_mm2;
    distance = std::hypot(weed.x - crop->x, weed.y - crop->y);
  }
  if (distance == 0.0) return Harmfulness{ctx.max_kappa, true};
  const double kappa = numerator / (crop_area * distance);
  if (kappa > ctx.max_kappa) return Harmfulness{ctx.max_kappa, true};
  return Harmfulness{kappa, false};
}

}  // namespace

Harmfulness harmfulness(const Plant& weed, std::span<const Plant> crops, const HarmfulnessContext& ctx) {
  const Plant* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& c : crops) {
    if (!c.is_crop()) continue;
    const double d = std::hypot(weed.x - c.x, weed.y - c.y);
    if (d < best_d) {
      best_d = d;
      best = &c;
    }
  }
  return kappa_from(weed, best, ctx);
}

Harmfulness harmfulness(const Plant& weed, const CropIndex& crops, const HarmfulnessContext& ctx) {
  return kappa_from(weed, crops.nearest(Point{weed.x, weed.y}), ctx);
}

}  // namespace rowplan
