// rowplan: field generation, planning, simulation, experiments and reports
// for a multi-head row-crop weeding tool.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rowplan/errors.hpp"
#include "rowplan/experiment.hpp"
#include "rowplan/oracle.hpp"
#include "rowplan/planner.hpp"
#include "rowplan/report.hpp"
#include "rowplan/simulator.hpp"

namespace {

using namespace rowplan;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Flags shared by every subcommand. Each one overrides the matching config key.
struct Overrides {
  std::string config;
  std::optional<double> lambda, gamma, theta, omega, rho;
  std::optional<int> heads;
  std::optional<std::string> mode;
  bool biodiv = false;
  std::optional<std::size_t> seeds;
  std::optional<std::string> out;
  std::optional<unsigned> workers;

  void attach(CLI::App& app, bool with_out_help = true) {
    app.add_option("--config", config, "JSON experiment config (tool, planner, sim, fields)")
        ->check(CLI::ExistingFile);
    app.add_option("--lambda", lambda, "weed density, weeds per m^2");
    app.add_option("--gamma", gamma, "robot speed, m/s");
    app.add_option("--theta", theta, "axis speed limit, m/s");
    app.add_option("--omega", omega, "logistic steepness of the feasibility score, 1/s");
    app.add_option("--rho", rho, "per-edge feasibility cutoff");
    app.add_option("--heads", heads, "number of weeding axes");
    app.add_option("--mode", mode, "observation model")->check(CLI::IsMember({"segment", "rolling"}));
    app.add_flag("--biodiv", biodiv, "bio-diversity-aware selection");
    app.add_option("--seeds", seeds, "number of seeds (0..n-1)");
    if (with_out_help) app.add_option("--out", out, "output path");
  }

  ExperimentConfig load(const ExperimentConfig& fallback) const {
    ExperimentConfig cfg = config.empty() ? fallback : load_experiment_config(config);
    if (gamma) cfg.tool.gamma = *gamma;
    if (theta) cfg.tool.theta = *theta;
    if (heads) cfg.tool.heads = *heads;
    if (omega) cfg.planner.omega = *omega;
    if (rho) cfg.planner.rho = *rho;
    if (seeds) cfg.seeds = seed_range(*seeds);
    if (workers) cfg.workers = *workers;
    if (out) cfg.out_dir = *out;
    if (lambda) {
      FieldSpec spec;
      for (const auto& f : cfg.fields) {
        if (!f.from_file()) {
          spec = f.spec;
          break;
        }
      }
      spec.lambda = *lambda;
      char name[64];
      std::snprintf(name, sizeof name, "lambda-%g", *lambda);
      cfg.fields = {FieldSource{name, spec, {}}};
    }
    if (mode) {
      const ObservationMode m = parse_observation_mode(*mode);
      std::erase_if(cfg.variants, [&](const PlannerVariant& v) { return v.mode != m; });
      if (cfg.variants.empty()) cfg.variants.push_back({m, false});
    }
    if (biodiv) {
      // Compare against the baseline under every selected observation model.
      std::vector<PlannerVariant> both;
      for (const auto& v : cfg.variants) {
        for (bool b : {false, true}) {
          const PlannerVariant pv{v.mode, b};
          if (std::find(both.begin(), both.end(), pv) == both.end()) both.push_back(pv);
        }
      }
      cfg.variants = both;
    }
    return cfg;
  }

  // Single planner for plan/simulate.
  PlannerConfig planner(const ExperimentConfig& cfg) const {
    PlannerConfig p = cfg.planner;
    p.mode = mode ? parse_observation_mode(*mode) : cfg.variants.front().mode;
    p.biodiv = biodiv || cfg.variants.front().biodiv;
    return p;
  }
};

ExperimentConfig defaults() {
  ExperimentConfig cfg;
  cfg.name = "cli";
  cfg.seeds = {0};
  cfg.fields = {FieldSource{"field", FieldSpec{}, {}}};
  cfg.variants = {{ObservationMode::segment, false}};
  return cfg;
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path || *path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + *path);
  out << text;
}

// The tool covers the loaded field unless a config pinned its width.
void match_field_width(ExperimentConfig& cfg, const FieldModel& field, bool from_config) {
  if (!from_config) {
    cfg.tool.lateral_width = field.width();
  } else if (cfg.tool.lateral_width != field.width()) {
    throw ConfigError("tool.lateral_width", "differs from the field width " + std::to_string(field.width()));
  }
}

FieldModel load_field_warn(const std::string& path) {
  std::vector<std::string> warnings;
  FieldModel field = load_field(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return field;
}

int run_generate(const Overrides& o, double width, double length, std::uint64_t seed, const std::string& mix_path,
                 std::optional<double> crop_spacing) {
  const ExperimentConfig cfg = o.load(defaults());
  FieldSpec spec = cfg.fields.front().spec;
  spec.width = width > 0.0 ? width : spec.width;
  spec.length = length > 0.0 ? length : spec.length;
  spec.seed = seed;
  if (!mix_path.empty()) spec.species_mix = load_species_mix(mix_path);
  if (crop_spacing) spec.crop_spacing = *crop_spacing;
  const FieldModel field = generate_field(spec);
  write_output(o.out, dump_field(field));
  std::cerr << "generated " << field.weed_count() << " weeds and " << field.plants().size() - field.weed_count()
            << " crops over " << spec.length << " m\n";
  return kExitOk;
}

int run_plan(const Overrides& o, const std::string& field_path) {
  ExperimentConfig cfg = o.load(defaults());
  const FieldModel field = load_field_warn(field_path);
  match_field_width(cfg, field, !o.config.empty());
  const PlannerConfig planner = o.planner(cfg);
  const RowPlan plan = plan_row(field, cfg.tool, planner);
  write_output(o.out, dump_plan(plan));
  std::size_t planned = 0;
  for (const auto& a : plan.axes) planned += a.nodes.size();
  std::cerr << "planned " << planned << " of " << field.weed_count() << " weeds (" << to_string(planner.mode)
            << (planner.biodiv ? ", bio-div" : "") << ")\n";
  return kExitOk;
}

int run_simulate(const Overrides& o, const std::string& field_path, const std::string& plan_path, double noise,
                 std::uint64_t seed, double withhold) {
  ExperimentConfig cfg = o.load(defaults());
  const FieldModel field = load_field_warn(field_path);
  match_field_width(cfg, field, !o.config.empty());
  cfg.sim.noise_sigma = noise >= 0.0 ? noise : cfg.sim.noise_sigma;
  cfg.sim.detection_withhold = withhold >= 0.0 ? withhold : cfg.sim.detection_withhold;
  cfg.sim.seed = seed;
  const PlannerConfig planner = o.planner(cfg);

  const RowPlan plan = plan_path.empty() ? plan_row(observe_field(field, cfg.sim), cfg.tool, planner)
                                         : load_plan(plan_path);
  RunRecord rec;
  rec.field_model = "field";
  rec.mode = plan.mode;
  rec.biodiv = plan.biodiv;
  rec.seed = seed;
  rec.lambda = field.spec().lambda;
  rec.metrics = simulate_run(field, plan, cfg.tool, cfg.sim);
  write_output(o.out, metrics_csv(std::span<const RunRecord>(&rec, 1)));
  return kExitOk;
}

int run_experiment_cmd(const Overrides& o, const std::string& suite) {
  ExperimentConfig base = builtin_suite(suite.empty() ? "paper-densities" : suite);
  if (!o.config.empty() && !suite.empty()) throw ConfigError("suite", "give either --suite or --config, not both");
  ExperimentConfig cfg = o.load(base);
  validate(cfg);
  if (cfg.out_dir.empty()) throw ConfigError("out", "experiment needs an output directory (--out or config 'out')");
  prepare_output_dir(cfg.out_dir);

  const auto records = run_experiment(cfg, [](std::size_t done, std::size_t total) {
    if (done == total || done % 10 == 0) std::cerr << "\r" << done << "/" << total << " field runs" << std::flush;
    if (done == total) std::cerr << "\n";
  });
  write_experiment(cfg, records);
  std::cout << format_table(summarize(records));
  std::cerr << "wrote " << (cfg.out_dir / "metrics.csv").string() << " and "
            << (cfg.out_dir / "summary.json").string() << "\n";
  return kExitOk;
}

int run_verify(const Overrides& o, std::size_t instances, std::uint64_t seed) {
  const ExperimentConfig cfg = o.load(defaults());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(0, 6);
  std::uniform_real_distribution<double> along(0.0, 0.6);
  std::uniform_real_distribution<double> area(100.0, 1500.0);
  std::bernoulli_distribution high(0.3);

  const Band band = cfg.tool.band(0);
  std::uniform_real_distribution<double> lateral(band.lo, std::nextafter(band.hi, band.lo));
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    std::vector<Plant> targets;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      Plant p;
      p.id = k;
      p.x = along(rng);
      p.y = lateral(rng);
      p.area_mm2 = area(rng);
      p.priority = high(rng) ? Priority::high : Priority::low;
      targets.push_back(p);
    }
    std::sort(targets.begin(), targets.end(), row_order_less);
    const Point start{0.0, band.center()};
    for (auto selection : {SelectionMode::baseline, SelectionMode::biodiv}) {
      PlannerConfig planner = cfg.planner;
      planner.biodiv = selection == SelectionMode::biodiv;
      const auto graph = build_graph(targets, CropIndex{}, cfg.tool, planner, start);
      const auto got = plan_window(graph, planner);
      const auto want = oracle::brute_force_plan(targets, {}, start, cfg.tool, planner, selection);
      if (got.nodes != want.best_nodes) ++mismatches;
    }
  }
  std::cout << "oracle equivalence: " << instances << " instances x 2 modes, " << mismatches << " mismatches\n";
  return mismatches == 0 ? kExitOk : kExitRuntime;
}

int run_report(const Overrides& o, const std::string& metrics, const std::string& field_path,
               const std::string& plan_path, double from_x, double span) {
  if (!o.out) throw ConfigError("out", "report needs an output directory (--out)");
  ReportOptions options;
  options.out_dir = *o.out;
  if (!field_path.empty() || !plan_path.empty()) {
    if (field_path.empty() || plan_path.empty()) {
      throw ConfigError("trajectory", "the trajectory plot needs both --field and --plan");
    }
    options.trajectory = TrajectoryView{load_field_warn(field_path), load_plan(plan_path), from_x, span};
  }
  const auto records = load_metrics_csv(metrics);
  const ReportResult result = render_report(records, options);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << result.table;
  for (const auto& p : result.written) std::cerr << "wrote " << p.string() << "\n";
  return kExitOk;
}

void print_error(const char* kind, const std::string& message, const std::string& field = {}) {
  nlohmann::ordered_json record{{"error", kind}, {"message", message}};
  if (!field.empty()) record["field"] = field;
  std::cerr << record.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-head weeding planner: generate fields, plan, simulate, run experiments, report"};
  app.require_subcommand(1);

  Overrides gen_o, plan_o, sim_o, exp_o, ver_o, rep_o;

  auto* gen = app.add_subcommand("generate", "generate a Poisson weed field");
  gen_o.attach(*gen);
  double width = 0.0, length = 0.0;
  std::uint64_t gen_seed = 0;
  std::string mix;
  std::optional<double> crop_spacing;
  gen->add_option("--width", width, "lateral weeding width, m (default 1.39)");
  gen->add_option("--length", length, "row length, m (default 100)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--species-mix", mix, "JSON list of species entries")->check(CLI::ExistingFile);
  gen->add_option("--crop-spacing", crop_spacing, "crop spacing along the row, m (0 = weed-only)");

  auto* plan = app.add_subcommand("plan", "plan axis trajectories for a field file");
  plan_o.attach(*plan);
  std::string plan_field;
  plan->add_option("--field", plan_field, "field JSON")->required()->check(CLI::ExistingFile);

  auto* sim = app.add_subcommand("simulate", "simulate a plan (or plan on the fly) and print run metrics");
  sim_o.attach(*sim);
  std::string sim_field, sim_plan;
  double noise = -1.0, withhold = -1.0;
  std::uint64_t sim_seed = 0;
  sim->add_option("--field", sim_field, "field JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--plan", sim_plan, "plan JSON; planned on the fly when omitted")->check(CLI::ExistingFile);
  sim->add_option("--noise", noise, "lateral actuation noise sigma, m");
  sim->add_option("--withhold", withhold, "probability a weed is hidden from the planner");
  sim->add_option("--seed", sim_seed, "simulation seed");

  auto* exp = app.add_subcommand("experiment", "run a suite of fields x seeds x planner variants");
  exp_o.attach(*exp);
  std::string suite;
  exp->add_option("--suite", suite, "built-in suite")->check(CLI::IsMember(builtin_suite_names()));
  exp->add_option("--workers", exp_o.workers, "worker threads (0 = all cores)");

  auto* ver = app.add_subcommand("verify", "check the planner against the brute-force oracle");
  ver_o.attach(*ver);
  std::size_t instances = 1000;
  std::uint64_t ver_seed = 1;
  ver->add_option("--instances", instances, "random instances");
  ver->add_option("--seed", ver_seed, "instance generator seed");

  auto* rep = app.add_subcommand("report", "render SVG plots and a summary table from a metrics CSV");
  rep_o.attach(*rep);
  std::string metrics, rep_field, rep_plan;
  double from_x = 0.0, span = 5.0;
  rep->add_option("metrics", metrics, "metrics CSV")->required()->check(CLI::ExistingFile);
  rep->add_option("--field", rep_field, "field JSON for the trajectory plot")->check(CLI::ExistingFile);
  rep->add_option("--plan", rep_plan, "plan JSON for the trajectory plot")->check(CLI::ExistingFile);
  rep->add_option("--from", from_x, "trajectory plot start, m");
  rep->add_option("--span", span, "trajectory plot length, m");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) {
      if (!gen_o.lambda) throw ConfigError("lambda", "generate needs --lambda");
      return run_generate(gen_o, width, length, gen_seed, mix, crop_spacing);
    }
    if (*plan) return run_plan(plan_o, plan_field);
    if (*sim) return run_simulate(sim_o, sim_field, sim_plan, noise, sim_seed, withhold);
    if (*exp) return run_experiment_cmd(exp_o, suite);
    if (*ver) return run_verify(ver_o, instances, ver_seed);
    if (*rep) return run_report(rep_o, metrics, rep_field, rep_plan, from_x, span);
  } catch (const ValidationError& e) {
    print_error(e.kind(), e.what(), e.field());
    return kExitConfig;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
