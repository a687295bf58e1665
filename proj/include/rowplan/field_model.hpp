#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rowplan {

using PlantId = std::int64_t;

enum class PlantKind { crop, weed };
enum class Priority { low, high };

std::string_view to_string(PlantKind kind);
std::string_view to_string(Priority priority);
PlantKind parse_plant_kind(std::string_view text);
Priority parse_priority(std::string_view text);

// Field frame: x runs along the direction of travel, y is lateral in [0, width)
// measured from the left edge of the tool workspace.
struct Plant {
  PlantId id = 0;
  double x = 0.0;
  double y = 0.0;
  PlantKind kind = PlantKind::weed;
  std::string species;
  double area_mm2 = 1.0;
  double beta = 1.0;
  Priority priority = Priority::high;

  bool is_weed() const { return kind == PlantKind::weed; }
  bool is_crop() const { return kind == PlantKind::crop; }
  friend bool operator==(const Plant&, const Plant&) = default;
};

// Row order used everywhere: x, then y, then id.
bool row_order_less(const Plant& a, const Plant& b);

// One entry of a weed species mix. Areas are log-normal with the given
// median (mm^2) and log-space standard deviation.
struct SpeciesMix {
  std::string species;
  double fraction = 1.0;
  double beta = 1.0;
  Priority priority = Priority::high;
  double area_median_mm2 = 400.0;
  double area_sigma = 0.5;
  friend bool operator==(const SpeciesMix&, const SpeciesMix&) = default;
};

struct FieldSpec {
  double lambda = 0.0;  // weeds per m^2
  double width = 1.39;  // lateral weeding width, meters
  double length = 100.0;
  std::vector<SpeciesMix> species_mix = {SpeciesMix{"weed"}};
  double crop_spacing = 0.0;  // 0 = weed-only field
  double crop_jitter = 0.01;
  std::string crop_species = "sugar_beet";
  double crop_area_median_mm2 = 1500.0;
  double crop_area_sigma = 0.3;
  std::uint64_t seed = 0;

  // Poisson arrival rate along the row (weeds per meter of travel).
  double arrival_rate() const { return lambda * width; }
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

// Throws ValidationError naming the first offending field.
void validate(const FieldSpec& spec);

class FieldModel {
 public:
  FieldModel() = default;
  // Sorts, validates, rejects duplicate ids and keeps the first of any plants
  // closer than kDedupTolerance.
  FieldModel(FieldSpec spec, std::vector<Plant> plants);

  const FieldSpec& spec() const { return spec_; }
  const std::vector<Plant>& plants() const { return plants_; }
  double width() const { return spec_.width; }
  // Row end used by the planners: spec length or just past the last plant.
  double extent() const;

  std::vector<Plant> weeds() const;
  std::vector<Plant> crops() const;
  const Plant* find(PlantId id) const;
  std::size_t weed_count() const;

  friend bool operator==(const FieldModel&, const FieldModel&) = default;

 private:
  FieldSpec spec_;
  std::vector<Plant> plants_;
};

// Two plants closer than this are the same detection.
inline constexpr double kDedupTolerance = 1e-3;

FieldModel generate_field(const FieldSpec& spec);

// P(dx/dy > gamma/theta) for dx ~ Exponential(eta): exp(-eta * gamma/theta * dy).
double reach_probability(double delta_y, double gamma, double theta, double eta);

FieldModel load_field(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
FieldModel parse_field(std::string_view json_text, std::vector<std::string>* warnings = nullptr);
void save_field(const FieldModel& model, const std::filesystem::path& path);
std::string dump_field(const FieldModel& model);

// The "spec" object of a field file on its own.
FieldSpec parse_field_spec(std::string_view json_text);
std::string dump_field_spec(const FieldSpec& spec);

std::vector<SpeciesMix> load_species_mix(const std::filesystem::path& path);

}  // namespace rowplan
