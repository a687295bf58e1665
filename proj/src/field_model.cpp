#include "rowplan/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "rowplan/errors.hpp"

namespace rowplan {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(PlantKind kind) { return kind == PlantKind::crop ? "crop" : "weed"; }

std::string_view to_string(Priority priority) { return priority == Priority::low ? "low" : "high"; }

PlantKind parse_plant_kind(std::string_view text) {
  if (text == "crop") return PlantKind::crop;
  if (text == "weed") return PlantKind::weed;
  throw ParseError("unknown plant kind '" + std::string(text) + "' (expected crop|weed)");
}

Priority parse_priority(std::string_view text) {
  if (text == "low") return Priority::low;
  if (text == "high") return Priority::high;
  throw ParseError("unknown priority '" + std::string(text) + "' (expected low|high)");
}

bool row_order_less(const Plant& a, const Plant& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.id < b.id;
}

void validate(const FieldSpec& spec) {
  if (!(spec.lambda >= 0.0) || !std::isfinite(spec.lambda)) {
    throw ValidationError("lambda", "must be a finite value >= 0");
  }
  if (!(spec.width > 0.0) || !std::isfinite(spec.width)) {
    throw ValidationError("width", "must be > 0");
  }
  if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
    throw ValidationError("length", "must be > 0");
  }
  if (!(spec.crop_spacing >= 0.0) || !std::isfinite(spec.crop_spacing)) {
    throw ValidationError("crop_spacing", "must be >= 0");
  }
  if (!(spec.crop_jitter >= 0.0)) throw ValidationError("crop_jitter", "must be >= 0");
  if (!(spec.crop_area_median_mm2 > 0.0)) throw ValidationError("crop_area_median_mm2", "must be > 0");
  if (!(spec.crop_area_sigma >= 0.0)) throw ValidationError("crop_area_sigma", "must be >= 0");
  if (spec.species_mix.empty()) throw ValidationError("species_mix", "must list at least one species");

  double total = 0.0;
  for (std::size_t i = 0; i < spec.species_mix.size(); ++i) {
    const auto& s = spec.species_mix[i];
    const std::string at = "species_mix[" + std::to_string(i) + "]";
    if (!(s.fraction >= 0.0)) throw ValidationError(at + ".fraction", "must be >= 0");
    if (!(s.beta >= 0.0)) throw ValidationError(at + ".beta", "must be >= 0");
    if (!(s.area_median_mm2 > 0.0)) throw ValidationError(at + ".area_median_mm2", "must be > 0");
    if (!(s.area_sigma >= 0.0)) throw ValidationError(at + ".area_sigma", "must be >= 0");
    total += s.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("species_mix", "fractions sum to " + std::to_string(total) + ", expected 1");
  }
}

namespace {

void validate_plant(const Plant& p, double width, const std::string& at) {
  if (!std::isfinite(p.x)) throw ValidationError(at + ".x_m", "must be finite");
  if (!(p.y >= 0.0 && p.y < width)) {
    throw ValidationError(at + ".y_m", "must lie in [0, width) with width " + std::to_string(width));
  }
  if (!(p.area_mm2 > 0.0) || !std::isfinite(p.area_mm2)) {
    throw ValidationError(at + ".area_mm2", "must be > 0");
  }
  if (!(p.beta >= 0.0) || !std::isfinite(p.beta)) throw ValidationError(at + ".beta", "must be >= 0");
}

// Drops plants that sit within the dedup tolerance of an earlier plant in
// row order. `plants` must already be sorted.
std::size_t remove_near_duplicates(std::vector<Plant>& plants) {
  std::vector<Plant> kept;
  kept.reserve(plants.size());
  std::size_t dropped = 0;
  for (auto& p : plants) {
    bool duplicate = false;
    for (auto it = kept.rbegin(); it != kept.rend() && p.x - it->x < kDedupTolerance; ++it) {
      if (std::hypot(p.x - it->x, p.y - it->y) < kDedupTolerance) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      ++dropped;
    } else {
      kept.push_back(std::move(p));
    }
  }
  plants = std::move(kept);
  return dropped;
}

}  // namespace

FieldModel::FieldModel(FieldSpec spec, std::vector<Plant> plants) : spec_(std::move(spec)), plants_(std::move(plants)) {
  validate(spec_);
  std::unordered_set<PlantId> ids;
  for (std::size_t i = 0; i < plants_.size(); ++i) {
    const std::string at = "plants[" + std::to_string(i) + "]";
    validate_plant(plants_[i], spec_.width, at);
    if (!ids.insert(plants_[i].id).second) {
      throw ValidationError(at + ".id", "duplicate id " + std::to_string(plants_[i].id));
    }
  }
  std::sort(plants_.begin(), plants_.end(), row_order_less);
  remove_near_duplicates(plants_);
}

double FieldModel::extent() const {
  double end = spec_.length;
  if (!plants_.empty()) end = std::max(end, std::nextafter(plants_.back().x, INFINITY));
  return end;
}

std::vector<Plant> FieldModel::weeds() const {
  std::vector<Plant> out;
  std::copy_if(plants_.begin(), plants_.end(), std::back_inserter(out), [](const Plant& p) { return p.is_weed(); });
  return out;
}

std::vector<Plant> FieldModel::crops() const {
  std::vector<Plant> out;
  std::copy_if(plants_.begin(), plants_.end(), std::back_inserter(out), [](const Plant& p) { return p.is_crop(); });
  return out;
}

const Plant* FieldModel::find(PlantId id) const {
  for (const auto& p : plants_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::size_t FieldModel::weed_count() const {
  return static_cast<std::size_t>(
      std::count_if(plants_.begin(), plants_.end(), [](const Plant& p) { return p.is_weed(); }));
}

FieldModel generate_field(const FieldSpec& spec) {
  validate(spec);

  // Independent streams so that toggling crops does not reshuffle weeds.
  std::seed_seq weed_seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32), 1u};
  std::seed_seq crop_seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32), 2u};
  std::mt19937_64 weed_rng(weed_seq);
  std::mt19937_64 crop_rng(crop_seq);

  const double below_width = std::nextafter(spec.width, 0.0);
  std::vector<Plant> plants;

  const double eta = spec.arrival_rate();
  if (eta > 0.0) {
    std::exponential_distribution<double> gap(eta);
    std::uniform_real_distribution<double> lateral(0.0, spec.width);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::vector<double> weights;
    for (const auto& s : spec.species_mix) weights.push_back(s.fraction);
    std::discrete_distribution<std::size_t> pick_species(weights.begin(), weights.end());

    double x = 0.0;
    while (true) {
      x += gap(weed_rng);
      if (x >= spec.length) break;
      Plant w;
      w.kind = PlantKind::weed;
      w.x = x;
      w.y = std::min(lateral(weed_rng), below_width);
      const auto& s = spec.species_mix[pick_species(weed_rng)];
      w.species = s.species;
      w.beta = s.beta;
      w.priority = s.priority;
      w.area_mm2 = s.area_median_mm2 * std::exp(s.area_sigma * unit_normal(weed_rng));
      plants.push_back(std::move(w));
    }
  }

  if (spec.crop_spacing > 0.0) {
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    for (std::size_t k = 0;; ++k) {
      const double x = spec.crop_spacing * (static_cast<double>(k) + 0.5);
      if (x >= spec.length) break;
      Plant c;
      c.kind = PlantKind::crop;
      c.species = spec.crop_species;
      c.x = x;
      c.y = std::clamp(0.5 * spec.width + spec.crop_jitter * unit_normal(crop_rng), 0.0, below_width);
      c.area_mm2 = spec.crop_area_median_mm2 * std::exp(spec.crop_area_sigma * unit_normal(crop_rng));
      c.beta = 0.0;
      c.priority = Priority::low;
      plants.push_back(std::move(c));
    }
  }

  std::stable_sort(plants.begin(), plants.end(), [](const Plant& a, const Plant& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
  remove_near_duplicates(plants);
  for (std::size_t i = 0; i < plants.size(); ++i) plants[i].id = static_cast<PlantId>(i);
  return FieldModel(spec, std::move(plants));
}

double reach_probability(double delta_y, double gamma, double theta, double eta) {
  if (!(delta_y >= 0.0) || !(gamma >= 0.0) || !(theta > 0.0) || !(eta >= 0.0)) {
    throw DomainError("reach_probability requires delta_y >= 0, gamma >= 0, theta > 0, eta >= 0");
  }
  const double exponent = eta * (gamma / theta) * delta_y;
  if (exponent == 0.0) return 1.0;
  return std::exp(-exponent);
}

// ---------------------------------------------------------------------------
// JSON I/O

namespace {

ordered_json species_to_json(const SpeciesMix& s) {
  return ordered_json{{"species", s.species},
                      {"fraction", s.fraction},
                      {"beta", s.beta},
                      {"priority", to_string(s.priority)},
                      {"area_median_mm2", s.area_median_mm2},
                      {"area_sigma", s.area_sigma}};
}

ordered_json spec_to_json(const FieldSpec& spec) {
  ordered_json mix = ordered_json::array();
  for (const auto& s : spec.species_mix) mix.push_back(species_to_json(s));
  return ordered_json{{"lambda", spec.lambda},
                      {"width", spec.width},
                      {"length", spec.length},
                      {"species_mix", mix},
                      {"crop_spacing", spec.crop_spacing},
                      {"crop_jitter", spec.crop_jitter},
                      {"crop_species", spec.crop_species},
                      {"crop_area_median_mm2", spec.crop_area_median_mm2},
                      {"crop_area_sigma", spec.crop_area_sigma},
                      {"seed", spec.seed}};
}

const ordered_json& require(const ordered_json& obj, const char* key, const std::string& at) {
  if (!obj.is_object()) throw ParseError(at + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(at + "." + key + ": missing");
  return *it;
}

double number_at(const ordered_json& v, const std::string& at) {
  if (!v.is_number()) throw ParseError(at + ": expected a number");
  return v.get<double>();
}

std::string string_at(const ordered_json& v, const std::string& at) {
  if (!v.is_string()) throw ParseError(at + ": expected a string");
  return v.get<std::string>();
}

template <typename T>
void optional_number(const ordered_json& obj, const char* key, const std::string& at, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      throw ParseError(at + "." + key + ": expected a non-negative integer");
    }
    out = it->get<std::uint64_t>();
  } else {
    out = number_at(*it, at + "." + key);
  }
}

SpeciesMix species_from_json(const ordered_json& j, const std::string& at) {
  SpeciesMix s;
  s.species = string_at(require(j, "species", at), at + ".species");
  optional_number(j, "fraction", at, s.fraction);
  optional_number(j, "beta", at, s.beta);
  if (auto it = j.find("priority"); it != j.end()) {
    try {
      s.priority = parse_priority(string_at(*it, at + ".priority"));
    } catch (const ParseError& e) {
      throw ParseError(at + ".priority: " + e.what());
    }
  }
  optional_number(j, "area_median_mm2", at, s.area_median_mm2);
  optional_number(j, "area_sigma", at, s.area_sigma);
  return s;
}

std::vector<SpeciesMix> species_list_from_json(const ordered_json& j, const std::string& at) {
  if (!j.is_array()) throw ParseError(at + ": expected an array");
  std::vector<SpeciesMix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(species_from_json(j[i], at + "[" + std::to_string(i) + "]"));
  return out;
}

FieldSpec spec_from_json(const ordered_json& j) {
  const std::string at = "spec";
  if (!j.is_object()) throw ParseError("spec: expected an object");
  FieldSpec spec;
  optional_number(j, "lambda", at, spec.lambda);
  optional_number(j, "width", at, spec.width);
  optional_number(j, "length", at, spec.length);
  if (auto it = j.find("species_mix"); it != j.end()) spec.species_mix = species_list_from_json(*it, at + ".species_mix");
  optional_number(j, "crop_spacing", at, spec.crop_spacing);
  optional_number(j, "crop_jitter", at, spec.crop_jitter);
  if (auto it = j.find("crop_species"); it != j.end()) spec.crop_species = string_at(*it, at + ".crop_species");
  optional_number(j, "crop_area_median_mm2", at, spec.crop_area_median_mm2);
  optional_number(j, "crop_area_sigma", at, spec.crop_area_sigma);
  optional_number(j, "seed", at, spec.seed);
  return spec;
}

ordered_json parse_json_text(std::string_view text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string dump_field(const FieldModel& model) {
  ordered_json plants = ordered_json::array();
  for (const auto& p : model.plants()) {
    plants.push_back(ordered_json{{"id", p.id},
                                  {"x_m", p.x},
                                  {"y_m", p.y},
                                  {"kind", to_string(p.kind)},
                                  {"species", p.species},
                                  {"area_mm2", p.area_mm2},
                                  {"beta", p.beta},
                                  {"priority", to_string(p.priority)}});
  }
  ordered_json doc{{"spec", spec_to_json(model.spec())}, {"plants", plants}};
  return doc.dump(1) + "\n";
}

FieldModel parse_field(std::string_view json_text, std::vector<std::string>* warnings) {
  const ordered_json doc = parse_json_text(json_text);
  if (!doc.is_object()) throw ParseError("field file: top level must be an object");
  FieldSpec spec = spec_from_json(require(doc, "spec", "field"));
  const auto& plants_json = require(doc, "plants", "field");
  if (!plants_json.is_array()) throw ParseError("plants: expected an array");

  std::vector<Plant> plants;
  plants.reserve(plants_json.size());
  for (std::size_t i = 0; i < plants_json.size(); ++i) {
    const std::string at = "plants[" + std::to_string(i) + "]";
    const auto& pj = plants_json[i];
    Plant p;
    const auto& id = require(pj, "id", at);
    if (!id.is_number_integer()) throw ParseError(at + ".id: expected an integer");
    p.id = id.get<PlantId>();
    p.x = number_at(require(pj, "x_m", at), at + ".x_m");
    p.y = number_at(require(pj, "y_m", at), at + ".y_m");
    try {
      p.kind = parse_plant_kind(string_at(require(pj, "kind", at), at + ".kind"));
      p.priority = parse_priority(string_at(require(pj, "priority", at), at + ".priority"));
    } catch (const ParseError& e) {
      throw ParseError(at + ": " + e.what());
    }
    p.species = string_at(require(pj, "species", at), at + ".species");
    p.area_mm2 = number_at(require(pj, "area_mm2", at), at + ".area_mm2");
    p.beta = number_at(require(pj, "beta", at), at + ".beta");
    plants.push_back(std::move(p));
  }

  if (warnings != nullptr) {
    if (!std::is_sorted(plants.begin(), plants.end(), row_order_less)) {
      warnings->push_back("plants were not in row order; re-sorted by x, y, id");
    }
  }
  const std::size_t before = plants.size();
  FieldModel model(std::move(spec), std::move(plants));
  if (warnings != nullptr && model.plants().size() != before) {
    warnings->push_back("merged " + std::to_string(before - model.plants().size()) +
                        " plant(s) closer than 1 mm to another plant");
  }
  return model;
}

FieldSpec parse_field_spec(std::string_view json_text) { return spec_from_json(parse_json_text(json_text)); }

std::string dump_field_spec(const FieldSpec& spec) { return spec_to_json(spec).dump(); }

FieldModel load_field(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open field file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_field(buffer.str(), warnings);
}

void save_field(const FieldModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write field file " + path.string());
  out << dump_field(model);
  if (!out) throw Error("failed writing field file " + path.string());
}

std::vector<SpeciesMix> load_species_mix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open species mix file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const ordered_json doc = parse_json_text(buffer.str());
  if (doc.is_object() && doc.contains("species_mix")) return species_list_from_json(doc["species_mix"], "species_mix");
  return species_list_from_json(doc, "species_mix");
}

}  // namespace rowplan
