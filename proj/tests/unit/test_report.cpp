#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rowplan/experiment.hpp"
#include "rowplan/report.hpp"

using namespace rowplan;

namespace {

std::vector<RunRecord> sample_records() {
  ExperimentConfig cfg;
  FieldSpec spec;
  spec.length = 6.0;
  spec.crop_spacing = 0.2;
  for (double lambda : {3.1, 15.4}) {
    spec.lambda = lambda;
    cfg.fields.push_back({lambda < 10 ? "low" : "high", spec, {}});
  }
  cfg.seeds = seed_range(3);
  cfg.workers = 1;
  return run_experiment(cfg);
}

bool is_svg(const std::string& s) {
  return s.rfind("<svg", 0) == 0 && s.find("</svg>") != std::string::npos;
}

}  // namespace

TEST_CASE("plots are standalone SVG documents") {
  const auto s = summarize(sample_records());
  CHECK(is_svg(loss_density_svg(s)));
  CHECK(is_svg(axis_distance_svg(s)));
  const std::string delta = paired_delta_svg(s);
  CHECK(is_svg(delta));
  char mean[32];
  std::snprintf(mean, sizeof mean, "%.2f", s.mode_deltas[1].mean);
  CHECK(delta.find(mean) != std::string::npos);
}

TEST_CASE("table lists every group") {
  const auto s = summarize(sample_records());
  const std::string table = format_table(s);
  CHECK(table.find("low") != std::string::npos);
  CHECK(table.find("high") != std::string::npos);
  CHECK(table.find("rolling") != std::string::npos);
}

TEST_CASE("render_report writes all files") {
  const auto dir = test::scratch_dir("report");
  const auto records = sample_records();
  ReportOptions options;
  options.out_dir = dir;
  const FieldModel f = load_field(test::fixture("three_plants.json"));
  options.trajectory = TrajectoryView{f, plan_row(f, ToolConfig{}, PlannerConfig{}), 0.0, 1.0};
  const ReportResult r = render_report(records, options);
  CHECK(r.warnings.empty());
  CHECK(r.written.size() == 5);
  for (const char* name : {"loss_vs_density.svg", "axis_distance.svg", "paired_delta.svg", "trajectory.svg",
                           "report.txt"}) {
    CHECK(std::filesystem::exists(dir / name));
  }
}

TEST_CASE("empty metrics give empty plots and a warning") {
  const auto dir = test::scratch_dir("report_empty");
  ReportOptions options;
  options.out_dir = dir;
  const ReportResult r = render_report({}, options);
  CHECK(r.warnings.size() == 1);
  std::ifstream in(dir / "loss_vs_density.svg");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(is_svg(text.str()));
}
