#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rowplan/experiment.hpp"
#include "rowplan/field_model.hpp"
#include "rowplan/planner.hpp"

namespace rowplan {

struct TrajectoryView {
  FieldModel field;
  RowPlan plan;
  double from_x = 0.0;
  double span_m = 5.0;
};

struct ReportOptions {
  std::filesystem::path out_dir;
  std::optional<TrajectoryView> trajectory;
};

struct ReportResult {
  std::string table;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> written;
};

// Plain-text table of the per-group summary and paired deltas.
std::string format_table(const ExperimentSummary& summary);

// Standalone SVG documents.
std::string loss_density_svg(const ExperimentSummary& summary);
std::string axis_distance_svg(const ExperimentSummary& summary);
std::string paired_delta_svg(const ExperimentSummary& summary);
std::string trajectory_svg(const TrajectoryView& view);

// Writes loss_vs_density.svg, axis_distance.svg, paired_delta.svg, report.txt
// and, when a trajectory view is given, trajectory.svg.
ReportResult render_report(std::span<const RunRecord> records, const ReportOptions& options);

}  // namespace rowplan
