#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "rowplan/errors.hpp"
#include "rowplan/experiment.hpp"

using namespace rowplan;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.name = "small";
  FieldSpec spec;
  spec.length = 8.0;
  spec.crop_spacing = 0.2;
  for (double lambda : {3.1, 22.3}) {
    spec.lambda = lambda;
    cfg.fields.push_back({"lambda-" + std::to_string(static_cast<int>(lambda)), spec, {}});
  }
  cfg.seeds = seed_range(4);
  cfg.workers = 1;
  return cfg;
}

std::string config_field(const std::string& json) {
  try {
    parse_experiment_config(json);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("records come back in field, seed, variant order") {
  const ExperimentConfig cfg = small_config();
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 2 * 4 * 2);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].run_id == i);
    CHECK(records[i].field_model == cfg.fields[i / 8].name);
    CHECK(records[i].seed == (i / 2) % 4);
    CHECK(records[i].mode == (i % 2 ? ObservationMode::rolling : ObservationMode::segment));
    CHECK(records[i].metrics.conserves());
  }
}

TEST_CASE("worker count does not change the CSV") {
  ExperimentConfig cfg = small_config();
  const std::string serial = metrics_csv(run_experiment(cfg));
  cfg.workers = 4;
  CHECK(metrics_csv(run_experiment(cfg)) == serial);
}

TEST_CASE("metrics CSV round trip") {
  const auto records = run_experiment(small_config());
  const std::string csv = metrics_csv(records);
  CHECK(csv.substr(0, kMetricsHeader.size()) == kMetricsHeader);
  const auto back = parse_metrics_csv(csv);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].field_model == records[i].field_model);
    CHECK(back[i].metrics.loss_pct == records[i].metrics.loss_pct);
    CHECK(back[i].metrics.axis_distance_mean == records[i].metrics.axis_distance_mean);
    CHECK(back[i].metrics.high_treated == records[i].metrics.high_treated);
  }
  CHECK(metrics_csv(back) == csv);
}

TEST_CASE("CSV parse errors name the line") {
  const std::string header(kMetricsHeader);
  const std::string good = "0,f,segment,0,1,3.1,10,8,1,1,1,0,0,10,0.5,0.1,10,9,0,0";
  CHECK(parse_metrics_csv(header + "\n" + good + "\n").size() == 1);

  auto error_of = [](const std::string& text) -> std::string {
    try {
      parse_metrics_csv(text);
    } catch (const ParseError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(error_of(header + "\n" + good + "\n0,f,segment,0,1,3.1,ten,8,1,1,1,0,0,10,0.5,0.1,10,9,0,0\n")
            .find("line 3") != std::string::npos);
  CHECK(error_of(header + "\n0,f,sliding,0,1,3.1,10,8,1,1,1,0,0,10,0.5,0.1,10,9,0,0\n").find("line 2") !=
        std::string::npos);
  // accurate + partial + missed != total
  CHECK(error_of(header + "\n0,f,segment,0,1,3.1,10,8,1,2,1,0,0,10,0.5,0.1,10,9,0,0\n").find("line 2") !=
        std::string::npos);
  CHECK_FALSE(error_of("run_id,field\n").empty());

  // The core columns alone are accepted.
  const std::string core = header.substr(0, header.find(",high_total"));
  CHECK(parse_metrics_csv(core + "\n0,f,rolling,1,1,3.1,10,8,1,1,1,0,0,10,0.5,0.1\n").front().biodiv);
}

TEST_CASE("config files reject unknown keys and bad values") {
  CHECK(config_field(R"({"tool": {"heads": 4, "gama": 0.5}})") == "tool.gama");
  CHECK(config_field(R"({"planner": {"harmfulness": {"lo_weight": 0.1}}})") == "planner.harmfulness.lo_weight");
  CHECK(config_field(R"({"seed": 3})") == "seed");
  CHECK(config_field(R"({"variants": [{"mode": "sliding"}]})") == "variants[0].mode");
  CHECK(config_field(R"({"planner": {"solver": "greedy"}})") == "planner.solver");
  CHECK(config_field(R"({"tool": {"heads": 2.5}})") == "tool.heads");
  CHECK(config_field(R"({"fields": [{"name": "a"}]})") == "fields[0]");
  CHECK(config_field(R"({"suite": "nope"})") == "suite");
  CHECK(config_field("[1, 2") == "config");
}

TEST_CASE("config validation names the offending key") {
  ExperimentConfig cfg = small_config();
  cfg.seeds = {1, 1};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.fields[1].name = cfg.fields[0].name;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_config();
  cfg.tool.theta = -1.0;
  try {
    validate(cfg);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "tool.theta");
  }
  cfg = small_config();
  cfg.fields[0].spec.width = 2.0;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("config dump parses back to the same runs") {
  ExperimentConfig cfg = small_config();
  cfg.planner.omega = 12.5;
  cfg.variants = {{ObservationMode::rolling, true}};
  const ExperimentConfig back = parse_experiment_config(dump_experiment_config(cfg));
  CHECK(back.name == cfg.name);
  CHECK(back.planner.omega == 12.5);
  CHECK(back.variants == cfg.variants);
  CHECK(back.seeds == cfg.seeds);
  REQUIRE(back.fields.size() == 2);
  CHECK(back.fields[1].spec == cfg.fields[1].spec);
}

TEST_CASE("suite key starts from a built-in suite") {
  const ExperimentConfig cfg = parse_experiment_config(R"({"suite": "paper-densities", "seeds": 3})");
  CHECK(cfg.fields.size() == 5);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(builtin_suite("biodiv").variants.size() == 4);
  CHECK(builtin_suite("biodiv").tool.gamma == 1.0);
}

TEST_CASE("file fields resolve against the config directory") {
  const auto dir = test::scratch_dir("cfg_paths");
  std::filesystem::copy_file(test::fixture("three_plants.json"), dir / "three.json");
  std::ofstream(dir / "exp.json") << R"({"fields": [{"name": "three", "path": "three.json"}], "seeds": 2})";
  const ExperimentConfig cfg = load_experiment_config(dir / "exp.json");
  REQUIRE(cfg.fields[0].from_file());
  const auto records = run_experiment(cfg);
  REQUIRE(records.size() == 4);
  CHECK(records[0].metrics.total_weeds == 2);
  CHECK(records[0].metrics.loss_pct == 0.0);
}

TEST_CASE("paired deltas match a recomputation from the records") {
  const auto records = run_experiment(small_config());
  const ExperimentSummary s = summarize(records);
  CHECK(s.groups.size() == 4);
  REQUIRE(s.mode_deltas.size() == 2);
  for (const auto& d : s.mode_deltas) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i + 1 < records.size(); i += 2) {
      if (records[i].field_model != d.field_model) continue;
      sum += records[i].metrics.loss_pct - records[i + 1].metrics.loss_pct;
      ++pairs;
    }
    CHECK(d.pairs == pairs);
    CHECK(d.mean == doctest::Approx(sum / static_cast<double>(pairs)));
  }
  CHECK(s.biodiv_deltas.empty());
}

TEST_CASE("write_experiment writes CSV and summary") {
  ExperimentConfig cfg = small_config();
  cfg.out_dir = test::scratch_dir("write") / "nested";
  const auto records = run_experiment(cfg);
  write_experiment(cfg, records);
  CHECK(load_metrics_csv(cfg.out_dir / "metrics.csv").size() == records.size());
  std::ifstream in(cfg.out_dir / "summary.json");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str().find("paired_mode_deltas") != std::string::npos);

  std::ofstream(cfg.out_dir / "blocker") << "x";
  CHECK_THROWS_AS(prepare_output_dir(cfg.out_dir / "blocker"), ConfigError);
}
