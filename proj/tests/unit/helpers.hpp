#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rowplan/field_model.hpp"

namespace rowplan::test {

inline Plant weed(PlantId id, double x, double y, double area = 400.0, Priority priority = Priority::high) {
  Plant p;
  p.id = id;
  p.x = x;
  p.y = y;
  p.area_mm2 = area;
  p.priority = priority;
  p.species = "weed";
  return p;
}

inline Plant crop(PlantId id, double x, double y, double area = 1000.0) {
  Plant p = weed(id, x, y, area, Priority::low);
  p.kind = PlantKind::crop;
  p.species = "sugar_beet";
  p.beta = 0.0;
  return p;
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(ROWPLAN_FIXTURE_DIR) / name;
}

// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rowplan_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace rowplan::test
