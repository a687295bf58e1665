#include "rowplan/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rowplan/errors.hpp"
#include "rowplan/planner.hpp"

namespace rowplan {

using ordered_json = nlohmann::ordered_json;

namespace {

bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
  });
}

// Shortest text that reads back to the same double.
std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (!valid_name(cfg.name)) throw ConfigError("name", "use letters, digits, '-', '_' or '.'");
  if (cfg.fields.empty()) throw ConfigError("fields", "needs at least one field source");
  if (cfg.seeds.empty()) throw ConfigError("seeds", "needs at least one seed");
  if (cfg.variants.empty()) throw ConfigError("variants", "needs at least one planner variant");

  std::set<std::string> names;
  for (std::size_t i = 0; i < cfg.fields.size(); ++i) {
    const auto& f = cfg.fields[i];
    const std::string at = "fields[" + std::to_string(i) + "]";
    if (!valid_name(f.name)) throw ConfigError(at + ".name", "use letters, digits, '-', '_' or '.'");
    if (!names.insert(f.name).second) throw ConfigError(at + ".name", "duplicate field name '" + f.name + "'");
    if (!f.from_file()) {
      try {
        validate(f.spec);
      } catch (const ValidationError& e) {
        throw ConfigError(at + ".spec." + e.field(), e.what());
      }
    }
  }
  for (std::size_t i = 0; i < cfg.variants.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.variants[i] == cfg.variants[j]) {
        throw ConfigError("variants[" + std::to_string(i) + "]", "duplicates variants[" + std::to_string(j) + "]");
      }
    }
  }
  std::set<std::uint64_t> seeds(cfg.seeds.begin(), cfg.seeds.end());
  if (seeds.size() != cfg.seeds.size()) throw ConfigError("seeds", "seeds must be distinct");

  auto wrap = [](const char* section, auto&& check) {
    try {
      check();
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ConfigError(std::string(section) + "." + e.field(), e.what());
    }
  };
  wrap("tool", [&] { validate(cfg.tool); });
  wrap("planner", [&] { validate(cfg.planner); });
  wrap("sim", [&] { validate(cfg.sim, cfg.tool); });
}

std::vector<std::uint64_t> seed_range(std::size_t count, std::uint64_t first) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

// ---------------------------------------------------------------------------
// Built-in suites

namespace {

struct Density {
  const char* name;
  double lambda;
};

constexpr Density kDensityLadder[] = {
    {"low-3.1", 3.1}, {"moderate-8.2", 8.2}, {"high-15.4", 15.4}, {"high-22.3", 22.3}, {"very-high-81.2", 81.2},
};

FieldSpec ladder_spec(double lambda) {
  FieldSpec spec;
  spec.lambda = lambda;
  spec.length = 50.0;
  spec.crop_spacing = 0.2;
  return spec;
}

}  // namespace

std::vector<std::string> builtin_suite_names() { return {"paper-densities", "biodiv"}; }

ExperimentConfig builtin_suite(std::string_view name) {
  ExperimentConfig cfg;
  cfg.name = std::string(name);
  cfg.seeds = seed_range(20);
  if (name == "paper-densities") {
    for (const auto& d : kDensityLadder) cfg.fields.push_back({d.name, ladder_spec(d.lambda), {}});
    return cfg;
  }
  if (name == "biodiv") {
    cfg.tool.gamma = 1.0;
    for (const auto& d : kDensityLadder) {
      FieldSpec spec = ladder_spec(d.lambda);
      spec.species_mix = {SpeciesMix{"dicot", 10.0 / 11.0, 1.0, Priority::low},
                          SpeciesMix{"grass", 1.0 / 11.0, 1.0, Priority::high}};
      cfg.fields.push_back({d.name, spec, {}});
    }
    cfg.variants = {{ObservationMode::segment, false},
                    {ObservationMode::segment, true},
                    {ObservationMode::rolling, false},
                    {ObservationMode::rolling, true}};
    return cfg;
  }
  std::string known;
  for (const auto& n : builtin_suite_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("suite", "unknown suite '" + std::string(name) + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Config files

namespace {

class Reader {
 public:
  Reader(const ordered_json& obj, std::string at) : obj_(obj), at_(std::move(at)) {
    if (!obj_.is_object()) throw ConfigError(at_.empty() ? "config" : at_, "expected an object");
  }

  std::string path(const std::string& key) const { return at_.empty() ? key : at_ + "." + key; }

  const ordered_json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <class T>
  void number(const std::string& key, T& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key), "expected a number");
      if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer() || v->get<double>() < 0.0) {
          throw ConfigError(path(key), "expected a non-negative integer");
        }
      }
      out = v->get<T>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) throw ConfigError(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  // Rejects keys nobody asked for, which catches typos.
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }
  }

 private:
  const ordered_json& obj_;
  std::string at_;
  std::set<std::string> seen_;
};

void read_tool(const ordered_json& j, ToolConfig& tool) {
  Reader r(j, "tool");
  r.number("heads", tool.heads);
  r.number("lateral_width", tool.lateral_width);
  r.number("workspace_depth", tool.workspace_depth);
  r.number("footprint_m", tool.footprint);
  r.number("gamma", tool.gamma);
  r.number("theta", tool.theta);
  r.number("dwell_s", tool.dwell);
  r.number("max_accel", tool.max_accel);
  r.finish();
}

void read_planner(const ordered_json& j, PlannerConfig& cfg) {
  Reader r(j, "planner");
  r.number("omega", cfg.omega);
  r.number("rho", cfg.rho);
  r.number("window_length", cfg.window_length);
  r.number("stride_fraction", cfg.stride_fraction);
  r.number("max_window_targets", cfg.max_window_targets);
  r.number("commit_time", cfg.commit_time);
  std::string solver;
  r.string("solver", solver);
  if (!solver.empty()) {
    try {
      cfg.solver = parse_window_solver(solver);
    } catch (const ConfigError& e) {
      throw ConfigError("planner.solver", e.what());
    }
  }
  if (const auto* h = r.find("harmfulness")) {
    Reader hr(*h, "planner.harmfulness");
    hr.number("reference_distance", cfg.harm.reference_distance);
    hr.number("nominal_crop_area_mm2", cfg.harm.nominal_crop_area_mm2);
    hr.number("low_weight", cfg.harm.low_weight);
    hr.number("high_weight", cfg.harm.high_weight);
    hr.number("max_kappa", cfg.harm.max_kappa);
    hr.finish();
  }
  r.finish();
}

void read_sim(const ordered_json& j, SimConfig& sim) {
  Reader r(j, "sim");
  r.number("noise_sigma", sim.noise_sigma);
  r.number("accurate_radius", sim.accurate_radius);
  r.number("partial_radius", sim.partial_radius);
  r.number("crop_safety_radius", sim.crop_safety_radius);
  r.number("detection_withhold", sim.detection_withhold);
  r.finish();
}

FieldSource read_field(const ordered_json& j, const std::string& at, const std::filesystem::path& base_dir) {
  Reader r(j, at);
  FieldSource f;
  r.string("name", f.name);
  std::string path;
  r.string("path", path);
  const auto* spec = r.find("spec");
  if (path.empty() == (spec == nullptr)) throw ConfigError(at, "give exactly one of 'spec' or 'path'");
  if (spec != nullptr) {
    try {
      f.spec = parse_field_spec(spec->dump());
    } catch (const ValidationError& e) {
      throw ConfigError(at + ".spec." + e.field(), e.what());
    } catch (const ParseError& e) {
      throw ConfigError(at + ".spec", e.what());
    }
  } else {
    f.path = std::filesystem::path(path);
    if (f.path.is_relative() && !base_dir.empty()) f.path = base_dir / f.path;
  }
  r.finish();
  return f;
}

ordered_json tool_json(const ToolConfig& t) {
  return {{"heads", t.heads},     {"lateral_width", t.lateral_width}, {"workspace_depth", t.workspace_depth},
          {"footprint_m", t.footprint}, {"gamma", t.gamma},           {"theta", t.theta},
          {"dwell_s", t.dwell},   {"max_accel", t.max_accel}};
}

ordered_json planner_json(const PlannerConfig& c) {
  return {{"omega", c.omega},
          {"rho", c.rho},
          {"window_length", c.window_length},
          {"stride_fraction", c.stride_fraction},
          {"max_window_targets", c.max_window_targets},
          {"commit_time", c.commit_time},
          {"solver", to_string(c.solver)},
          {"harmfulness",
           {{"reference_distance", c.harm.reference_distance},
            {"nominal_crop_area_mm2", c.harm.nominal_crop_area_mm2},
            {"low_weight", c.harm.low_weight},
            {"high_weight", c.harm.high_weight},
            {"max_kappa", c.harm.max_kappa}}}};
}

ordered_json sim_json(const SimConfig& s) {
  return {{"noise_sigma", s.noise_sigma},
          {"accurate_radius", s.accurate_radius},
          {"partial_radius", s.partial_radius},
          {"crop_safety_radius", s.crop_safety_radius},
          {"detection_withhold", s.detection_withhold}};
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  Reader r(doc, "");
  ExperimentConfig cfg;
  std::string suite;
  r.string("suite", suite);
  if (!suite.empty()) cfg = builtin_suite(suite);

  r.string("name", cfg.name);
  if (const auto* fields = r.find("fields")) {
    if (!fields->is_array()) throw ConfigError("fields", "expected an array");
    cfg.fields.clear();
    for (std::size_t i = 0; i < fields->size(); ++i) {
      cfg.fields.push_back(read_field((*fields)[i], "fields[" + std::to_string(i) + "]", base_dir));
    }
  }
  if (const auto* t = r.find("tool")) read_tool(*t, cfg.tool);
  if (const auto* p = r.find("planner")) read_planner(*p, cfg.planner);
  if (const auto* s = r.find("sim")) read_sim(*s, cfg.sim);
  if (const auto* v = r.find("variants")) {
    if (!v->is_array()) throw ConfigError("variants", "expected an array");
    cfg.variants.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string at = "variants[" + std::to_string(i) + "]";
      Reader vr((*v)[i], at);
      std::string mode = "segment";
      PlannerVariant var;
      vr.string("mode", mode);
      vr.boolean("biodiv", var.biodiv);
      vr.finish();
      try {
        var.mode = parse_observation_mode(mode);
      } catch (const ConfigError& e) {
        throw ConfigError(at + ".mode", e.what());
      }
      cfg.variants.push_back(var);
    }
  }
  if (const auto* s = r.find("seeds")) {
    if (s->is_number_unsigned()) {
      cfg.seeds = seed_range(s->get<std::size_t>());
    } else if (s->is_array() && std::all_of(s->begin(), s->end(), [](const auto& x) { return x.is_number_unsigned(); })) {
      cfg.seeds = s->get<std::vector<std::uint64_t>>();
    } else {
      throw ConfigError("seeds", "expected a seed count or an array of non-negative integers");
    }
  }
  std::string out;
  r.string("out", out);
  if (!out.empty()) {
    cfg.out_dir = out;
    if (cfg.out_dir.is_relative() && !base_dir.empty()) cfg.out_dir = base_dir / cfg.out_dir;
  }
  r.number("workers", cfg.workers);
  r.finish();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str(), path.parent_path());
}

std::string dump_experiment_config(const ExperimentConfig& cfg) {
  ordered_json fields = ordered_json::array();
  for (const auto& f : cfg.fields) {
    if (f.from_file()) {
      fields.push_back({{"name", f.name}, {"path", f.path.string()}});
    } else {
      fields.push_back({{"name", f.name}, {"spec", ordered_json::parse(dump_field_spec(f.spec))}});
    }
  }
  ordered_json variants = ordered_json::array();
  for (const auto& v : cfg.variants) variants.push_back({{"mode", to_string(v.mode)}, {"biodiv", v.biodiv}});
  ordered_json doc{{"name", cfg.name},       {"fields", fields},
                   {"tool", tool_json(cfg.tool)}, {"planner", planner_json(cfg.planner)},
                   {"sim", sim_json(cfg.sim)},    {"variants", variants},
                   {"seeds", cfg.seeds},          {"workers", cfg.workers}};
  if (!cfg.out_dir.empty()) doc["out"] = cfg.out_dir.string();
  return doc.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Running

std::vector<RunRecord> run_field(const FieldModel& field, const std::string& field_model, std::uint64_t seed,
                                 const ExperimentConfig& cfg) {
  SimConfig sim = cfg.sim;
  sim.seed = seed;
  const FieldModel observed = observe_field(field, sim);

  std::vector<RunRecord> out;
  for (const auto& v : cfg.variants) {
    PlannerConfig planner = cfg.planner;
    planner.mode = v.mode;
    planner.biodiv = v.biodiv;
    const RowPlan plan = plan_row(observed, cfg.tool, planner);
    RunRecord rec;
    rec.field_model = field_model;
    rec.mode = v.mode;
    rec.biodiv = v.biodiv;
    rec.seed = seed;
    rec.lambda = field.spec().lambda;
    rec.metrics = simulate_run(field, plan, cfg.tool, sim);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  validate(cfg);

  std::vector<std::optional<FieldModel>> fixed(cfg.fields.size());
  for (std::size_t i = 0; i < cfg.fields.size(); ++i) {
    if (!cfg.fields[i].from_file()) continue;
    fixed[i] = load_field(cfg.fields[i].path);
    if (fixed[i]->width() != cfg.tool.lateral_width) {
      throw ConfigError("fields[" + std::to_string(i) + "].path",
                        "field width " + std::to_string(fixed[i]->width()) + " differs from tool lateral_width " +
                            std::to_string(cfg.tool.lateral_width));
    }
  }
  for (std::size_t i = 0; i < cfg.fields.size(); ++i) {
    if (!cfg.fields[i].from_file() && cfg.fields[i].spec.width != cfg.tool.lateral_width) {
      throw ConfigError("fields[" + std::to_string(i) + "].spec.width", "must equal tool lateral_width");
    }
  }

  const std::size_t jobs = cfg.fields.size() * cfg.seeds.size();
  std::vector<std::vector<RunRecord>> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> failed{false};
  std::mutex progress_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      const std::size_t fi = job / cfg.seeds.size();
      const std::uint64_t seed = cfg.seeds[job % cfg.seeds.size()];
      try {
        const auto& source = cfg.fields[fi];
        if (fixed[fi]) {
          results[job] = run_field(*fixed[fi], source.name, seed, cfg);
        } else {
          FieldSpec spec = source.spec;
          spec.seed = seed;
          results[job] = run_field(generate_field(spec), source.name, seed, cfg);
        }
      } catch (...) {
        errors[job] = std::current_exception();
        failed.store(true);
        return;
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, jobs);
      }
    }
  };

  unsigned workers = cfg.workers != 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Report the failure of the earliest job so errors do not depend on scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<RunRecord> records;
  records.reserve(jobs * cfg.variants.size());
  for (auto& batch : results) {
    for (auto& rec : batch) {
      rec.run_id = records.size();
      records.push_back(std::move(rec));
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// CSV

std::string metrics_csv(std::span<const RunRecord> records) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : records) {
    const auto& m = r.metrics;
    if (!m.conserves()) {
      throw Error("run " + std::to_string(r.run_id) + " breaks conservation: accurate + partial + missed != total");
    }
    const std::string cells[] = {std::to_string(r.run_id),
                                 r.field_model,
                                 std::string(to_string(r.mode)),
                                 r.biodiv ? "1" : "0",
                                 std::to_string(r.seed),
                                 format_number(r.lambda),
                                 std::to_string(m.total_weeds),
                                 std::to_string(m.accurate_hits),
                                 std::to_string(m.partial_hits),
                                 std::to_string(m.missed),
                                 std::to_string(m.missed_planning),
                                 std::to_string(m.missed_detection),
                                 std::to_string(m.crop_false_hits),
                                 format_number(m.loss_pct),
                                 format_number(m.axis_distance_mean),
                                 format_number(m.axis_distance_std),
                                 std::to_string(m.high_total),
                                 std::to_string(m.high_treated),
                                 std::to_string(m.low_total),
                                 std::to_string(m.low_treated)};
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out += ',';
      out += c;
      first = false;
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return cells;
    start = comma + 1;
  }
}

template <class T>
T parse_cell(std::string_view cell, std::size_t line, std::string_view column) {
  T value{};
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw ParseError("metrics CSV line " + std::to_string(line) + ": column " + std::string(column) + ": '" +
                     std::string(cell) + "' is not a valid number");
  }
  return value;
}

}  // namespace

std::vector<RunRecord> parse_metrics_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw ParseError("metrics CSV line 1: missing header");

  const auto header = split_row(lines[0]);
  const auto expected = split_row(kMetricsHeader);
  // The four priority columns are optional so plain simulator-schema files load.
  constexpr std::size_t kCoreColumns = 16;
  if (header.size() < kCoreColumns || header.size() > expected.size() ||
      !std::equal(header.begin(), header.end(), expected.begin())) {
    throw ParseError("metrics CSV line 1: unexpected header (want " + std::string(kMetricsHeader) + ")");
  }

  std::vector<RunRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    const auto c = split_row(lines[i]);
    if (c.size() != header.size()) {
      throw ParseError("metrics CSV line " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                       " columns, found " + std::to_string(c.size()));
    }
    RunRecord r;
    r.run_id = parse_cell<std::size_t>(c[0], line, expected[0]);
    r.field_model = std::string(c[1]);
    if (!valid_name(r.field_model)) {
      throw ParseError("metrics CSV line " + std::to_string(line) + ": bad field_model '" + r.field_model + "'");
    }
    if (c[2] == "segment") {
      r.mode = ObservationMode::segment;
    } else if (c[2] == "rolling") {
      r.mode = ObservationMode::rolling;
    } else {
      throw ParseError("metrics CSV line " + std::to_string(line) + ": mode must be segment or rolling");
    }
    if (c[3] != "0" && c[3] != "1") {
      throw ParseError("metrics CSV line " + std::to_string(line) + ": biodiv must be 0 or 1");
    }
    r.biodiv = c[3] == "1";
    r.seed = parse_cell<std::uint64_t>(c[4], line, expected[4]);
    r.lambda = parse_cell<double>(c[5], line, expected[5]);
    auto& m = r.metrics;
    m.total_weeds = parse_cell<std::size_t>(c[6], line, expected[6]);
    m.accurate_hits = parse_cell<std::size_t>(c[7], line, expected[7]);
    m.partial_hits = parse_cell<std::size_t>(c[8], line, expected[8]);
    m.missed = parse_cell<std::size_t>(c[9], line, expected[9]);
    m.missed_planning = parse_cell<std::size_t>(c[10], line, expected[10]);
    m.missed_detection = parse_cell<std::size_t>(c[11], line, expected[11]);
    m.crop_false_hits = parse_cell<std::size_t>(c[12], line, expected[12]);
    m.loss_pct = parse_cell<double>(c[13], line, expected[13]);
    m.axis_distance_mean = parse_cell<double>(c[14], line, expected[14]);
    m.axis_distance_std = parse_cell<double>(c[15], line, expected[15]);
    if (c.size() == expected.size()) {
      m.high_total = parse_cell<std::size_t>(c[16], line, expected[16]);
      m.high_treated = parse_cell<std::size_t>(c[17], line, expected[17]);
      m.low_total = parse_cell<std::size_t>(c[18], line, expected[18]);
      m.low_treated = parse_cell<std::size_t>(c[19], line, expected[19]);
    }
    if (!m.conserves()) {
      throw ParseError("metrics CSV line " + std::to_string(line) + ": accurate + partial + missed != total_weeds");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RunRecord> load_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open metrics file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_metrics_csv(buffer.str());
}

// ---------------------------------------------------------------------------
// Summaries

namespace {

template <class Key, class Value>
Value& slot(std::vector<std::pair<Key, Value>>& table, const Key& key) {
  for (auto& [k, v] : table) {
    if (k == key) return v;
  }
  table.emplace_back(key, Value{});
  return table.back().second;
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

}  // namespace

ExperimentSummary summarize(std::span<const RunRecord> records) {
  ExperimentSummary out;

  using GroupKey = std::tuple<std::string, ObservationMode, bool>;
  std::vector<std::pair<GroupKey, std::vector<const RunRecord*>>> groups;
  for (const auto& r : records) slot(groups, GroupKey{r.field_model, r.mode, r.biodiv}).push_back(&r);
  // Order by first appearance of the field model, then variant order.
  std::vector<std::string> field_order;
  for (const auto& r : records) {
    if (std::find(field_order.begin(), field_order.end(), r.field_model) == field_order.end()) {
      field_order.push_back(r.field_model);
    }
  }
  for (const auto& field : field_order) {
    for (const auto& [key, runs] : groups) {
      if (std::get<0>(key) != field) continue;
      std::vector<RunMetrics> metrics;
      for (const auto* r : runs) metrics.push_back(r->metrics);
      out.groups.push_back(GroupSummary{field, runs.front()->lambda, PlannerVariant{std::get<1>(key), std::get<2>(key)},
                                        aggregate_metrics(metrics)});
    }
  }

  // Pair by seed within a field model.
  using PairKey = std::tuple<std::string, bool, std::uint64_t>;
  struct ModePair {
    const RunRecord* segment = nullptr;
    const RunRecord* rolling = nullptr;
  };
  std::vector<std::pair<PairKey, ModePair>> mode_pairs;
  using BioKey = std::tuple<std::string, ObservationMode, std::uint64_t>;
  struct BioPair {
    const RunRecord* baseline = nullptr;
    const RunRecord* biodiv = nullptr;
  };
  std::vector<std::pair<BioKey, BioPair>> bio_pairs;
  for (const auto& r : records) {
    auto& mp = slot(mode_pairs, PairKey{r.field_model, r.biodiv, r.seed});
    (r.mode == ObservationMode::segment ? mp.segment : mp.rolling) = &r;
    auto& bp = slot(bio_pairs, BioKey{r.field_model, r.mode, r.seed});
    (r.biodiv ? bp.biodiv : bp.baseline) = &r;
  }

  for (const auto& field : field_order) {
    for (bool biodiv : {false, true}) {
      ModeDelta d;
      d.field_model = field;
      d.biodiv = biodiv;
      for (const auto& [key, p] : mode_pairs) {
        if (std::get<0>(key) != field || std::get<1>(key) != biodiv || !p.segment || !p.rolling) continue;
        d.lambda = p.segment->lambda;
        d.loss_improvement.push_back(p.segment->metrics.loss_pct - p.rolling->metrics.loss_pct);
      }
      if (d.loss_improvement.empty()) continue;
      d.pairs = d.loss_improvement.size();
      for (double x : d.loss_improvement) d.mean += x;
      d.mean /= static_cast<double>(d.pairs);
      d.std = sample_std(d.loss_improvement, d.mean);
      out.mode_deltas.push_back(std::move(d));
    }
    for (auto mode : {ObservationMode::segment, ObservationMode::rolling}) {
      BiodivDelta d;
      d.field_model = field;
      d.mode = mode;
      for (const auto& [key, p] : bio_pairs) {
        if (std::get<0>(key) != field || std::get<1>(key) != mode || !p.baseline || !p.biodiv) continue;
        d.lambda = p.baseline->lambda;
        ++d.pairs;
        d.high_rate_mean += p.biodiv->metrics.high_rate_pct() - p.baseline->metrics.high_rate_pct();
        d.low_rate_mean += p.biodiv->metrics.low_rate_pct() - p.baseline->metrics.low_rate_pct();
        d.loss_mean += p.biodiv->metrics.loss_pct - p.baseline->metrics.loss_pct;
      }
      if (d.pairs == 0) continue;
      const double n = static_cast<double>(d.pairs);
      d.high_rate_mean /= n;
      d.low_rate_mean /= n;
      d.loss_mean /= n;
      out.biodiv_deltas.push_back(d);
    }
  }
  return out;
}

std::string summary_json(const ExperimentSummary& summary, std::string_view name) {
  ordered_json groups = ordered_json::array();
  for (const auto& g : summary.groups) {
    groups.push_back({{"field_model", g.field_model},
                      {"lambda", g.lambda},
                      {"mode", to_string(g.variant.mode)},
                      {"biodiv", g.variant.biodiv},
                      {"runs", g.metrics.runs},
                      {"loss_mean", g.metrics.loss_mean},
                      {"loss_std", g.metrics.loss_std},
                      {"axis_dist_mean_m", g.metrics.distance_mean},
                      {"axis_dist_std_m", g.metrics.distance_std},
                      {"high_rate_mean", g.metrics.high_rate_mean},
                      {"low_rate_mean", g.metrics.low_rate_mean}});
  }
  ordered_json modes = ordered_json::array();
  for (const auto& d : summary.mode_deltas) {
    modes.push_back({{"field_model", d.field_model},
                     {"lambda", d.lambda},
                     {"biodiv", d.biodiv},
                     {"pairs", d.pairs},
                     {"loss_improvement_mean", d.mean},
                     {"loss_improvement_std", d.std}});
  }
  ordered_json bio = ordered_json::array();
  for (const auto& d : summary.biodiv_deltas) {
    bio.push_back({{"field_model", d.field_model},
                   {"lambda", d.lambda},
                   {"mode", to_string(d.mode)},
                   {"pairs", d.pairs},
                   {"high_rate_delta_mean", d.high_rate_mean},
                   {"low_rate_delta_mean", d.low_rate_mean},
                   {"loss_delta_mean", d.loss_mean}});
  }
  ordered_json doc{{"name", name},
                   {"groups", groups},
                   {"paired_mode_deltas", modes},
                   {"paired_biodiv_deltas", bio}};
  return doc.dump(1) + "\n";
}

void prepare_output_dir(const std::filesystem::path& dir) {
  if (dir.empty()) throw ConfigError("out", "no output directory given");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("out", "cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

void write_experiment(const ExperimentConfig& cfg, std::span<const RunRecord> records) {
  prepare_output_dir(cfg.out_dir);

  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
  };
  write(cfg.out_dir / "metrics.csv", metrics_csv(records));
  write(cfg.out_dir / "summary.json", summary_json(summarize(records), cfg.name));
}

}  // namespace rowplan
