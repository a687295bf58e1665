#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rowplan/field_model.hpp"
#include "rowplan/kinematics.hpp"
#include "rowplan/simulator.hpp"
#include "rowplan/trajectory.hpp"

namespace rowplan {

// A generated field (spec.seed is replaced by each run seed) or a fixed
// field file shared by every seed.
struct FieldSource {
  std::string name;
  FieldSpec spec;
  std::filesystem::path path;

  bool from_file() const { return !path.empty(); }
};

struct PlannerVariant {
  ObservationMode mode = ObservationMode::segment;
  bool biodiv = false;
  friend bool operator==(const PlannerVariant&, const PlannerVariant&) = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<FieldSource> fields;
  ToolConfig tool;
  PlannerConfig planner;  // mode and biodiv are taken from each variant
  std::vector<PlannerVariant> variants = {{ObservationMode::segment, false}, {ObservationMode::rolling, false}};
  SimConfig sim;  // seed is replaced by each run seed
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir;
  unsigned workers = 0;  // 0 = one per hardware thread
};

// Throws ConfigError naming the offending key.
void validate(const ExperimentConfig& cfg);

std::vector<std::string> builtin_suite_names();
// "paper-densities": the five-density ladder, segment vs rolling, 20 seeds.
// "biodiv": same densities at gamma 1.0 with a 10:1 low:high priority mix,
// baseline vs bio-div selection in both observation modes.
ExperimentConfig builtin_suite(std::string_view name);

// Keys mirror the structs; a "suite" key starts from a built-in suite and the
// remaining keys override it. Relative field paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string dump_experiment_config(const ExperimentConfig& cfg);

std::vector<std::uint64_t> seed_range(std::size_t count, std::uint64_t first = 0);

struct RunRecord {
  std::size_t run_id = 0;
  std::string field_model;
  ObservationMode mode = ObservationMode::segment;
  bool biodiv = false;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  RunMetrics metrics;
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Runs every (field, seed, variant) combination on a worker pool. Records come
// back in (field, seed, variant) order regardless of scheduling.
using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// One field run through every variant with a given seed.
std::vector<RunRecord> run_field(const FieldModel& field, const std::string& field_model, std::uint64_t seed,
                                 const ExperimentConfig& cfg);

inline constexpr std::string_view kMetricsHeader =
    "run_id,field_model,mode,biodiv,seed,lambda,total_weeds,accurate,partial,missed,missed_planning,"
    "missed_detection,crop_false_hits,loss_pct,axis_dist_mean_m,axis_dist_std_m,high_total,high_treated,"
    "low_total,low_treated";

// Throws Error if a record breaks conservation.
std::string metrics_csv(std::span<const RunRecord> records);
// Throws ParseError naming the 1-based line of the first malformed row.
std::vector<RunRecord> parse_metrics_csv(std::string_view text);
std::vector<RunRecord> load_metrics_csv(const std::filesystem::path& path);

struct GroupSummary {
  std::string field_model;
  double lambda = 0.0;
  PlannerVariant variant;
  MetricSummary metrics;
};

// Per-seed paired differences within one field model.
struct ModeDelta {
  std::string field_model;
  double lambda = 0.0;
  bool biodiv = false;
  std::size_t pairs = 0;
  std::vector<double> loss_improvement;  // segment loss - rolling loss, per seed
  double mean = 0.0;
  double std = 0.0;
};

struct BiodivDelta {
  std::string field_model;
  double lambda = 0.0;
  ObservationMode mode = ObservationMode::segment;
  std::size_t pairs = 0;
  double high_rate_mean = 0.0;  // bio-div minus baseline, percentage points
  double low_rate_mean = 0.0;
  double loss_mean = 0.0;
};

struct ExperimentSummary {
  std::vector<GroupSummary> groups;
  std::vector<ModeDelta> mode_deltas;
  std::vector<BiodivDelta> biodiv_deltas;
};

// Groups keep first-appearance order of field models.
ExperimentSummary summarize(std::span<const RunRecord> records);
std::string summary_json(const ExperimentSummary& summary, std::string_view name);

// Creates the directory if needed; throws ConfigError when that fails.
void prepare_output_dir(const std::filesystem::path& dir);

// Writes metrics.csv and summary.json into cfg.out_dir.
void write_experiment(const ExperimentConfig& cfg, std::span<const RunRecord> records);

}  // namespace rowplan
