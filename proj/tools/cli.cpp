#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "etforge/analysis.hpp"
#include "etforge/generator.hpp"
#include "etforge/io.hpp"
#include "etforge/record.hpp"

namespace etforge::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool quiet = false;
};

struct Context {
  Options options;
  json config;
  fs::path base_dir;
  fs::path out_dir;
  int workers = 1;
  std::ostream& out;

  void say(const std::string& line) const {
    if (!options.quiet) out << line << '\n';
  }
  fs::path input(const std::string& file) const {
    const fs::path p(file);
    return p.is_absolute() ? p : base_dir / p;
  }
  fs::path output(const std::string& file) const { return out_dir / file; }
};

[[noreturn]] void field_error(std::string_view key, const std::string& message) {
  throw InputError("config field '" + std::string(key) + "': " + message);
}

void allow_keys(const json& j, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw InputError("config: top level must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) field_error(key, "unknown field");
  }
}

const json& require(const json& j, std::string_view key) {
  if (!j.contains(key)) field_error(key, "missing");
  return j.at(key);
}

std::string require_text(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_string()) field_error(key, "expected a string");
  return v.get<std::string>();
}

double number_or(const json& j, std::string_view key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) field_error(key, "expected a number");
  return j.at(key).get<double>();
}

EDP edp_field(const json& j) {
  if (!j.contains("edp")) return EDP::DriftRatio;
  if (!j.at("edp").is_string()) field_error("edp", "expected a string");
  try {
    return parse_edp(j.at("edp").get<std::string>());
  } catch (const InputError& e) {
    field_error("edp", e.what());
  }
}

AnalysisOptions analysis_options(const json& j) {
  AnalysisOptions o;
  o.collapse_drift = number_or(j, "collapse_drift", o.collapse_drift);
  o.sdof_height = number_or(j, "sdof_height", o.sdof_height);
  if (!(o.collapse_drift > 0.0)) field_error("collapse_drift", "must be positive");
  if (!(o.sdof_height > 0.0)) field_error("sdof_height", "must be positive");
  return o;
}

AccelerationRecord load_record(const Context& ctx, std::string_view key) {
  return io::read_record_csv(ctx.input(require_text(ctx.config, key)));
}

/// Profile from the config, or the linear profile recorded in the ETEF header.
IntensifyingProfile profile_for(const json& j, const AccelerationRecord* etef) {
  if (j.contains("profile")) return io::parse_profile(j.at("profile"));
  if (etef != nullptr) {
    const auto& meta = etef->meta();
    const auto kind = meta.find("profile");
    const auto time = meta.find("target_time");
    if (kind != meta.end() && kind->second == "linear" && time != meta.end()) {
      return IntensifyingProfile::linear(std::stod(time->second));
    }
  }
  field_error("profile", "missing (the excitation header carries no linear profile)");
}

std::vector<AccelerationRecord> load_suite(const Context& ctx) {
  const json& j = ctx.config;
  std::vector<AccelerationRecord> records;
  if (j.contains("records")) {
    const json& list = j.at("records");
    if (!list.is_array()) field_error("records", "expected an array of record CSV paths");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_string()) field_error("records", "element " + std::to_string(i) + " is not a path");
      records.push_back(io::read_record_csv(ctx.input(list[i].get<std::string>())));
    }
  } else if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    if (!s.is_object()) field_error("synthetic", "expected an object");
    for (const auto& [key, _] : s.items()) {
      static constexpr std::string_view allowed[] = {"count", "seed", "duration", "dt", "damping",
                                                     "anchor_period", "spectrum", "periods"};
      if (std::find(std::begin(allowed), std::end(allowed), key) == std::end(allowed)) {
        field_error("synthetic." + key, "unknown field");
      }
    }
    SyntheticSuite suite;
    if (s.contains("count")) {
      if (!s.at("count").is_number_unsigned()) field_error("synthetic.count", "expected a non-negative integer");
      suite.count = s.at("count").get<std::size_t>();
    }
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) field_error("synthetic.seed", "expected a non-negative integer");
      suite.rng_seed = s.at("seed").get<std::uint64_t>();
    }
    if (ctx.options.seed) suite.rng_seed = *ctx.options.seed;
    suite.duration = number_or(s, "duration", suite.duration);
    suite.dt = number_or(s, "dt", suite.dt);
    suite.damping = number_or(s, "damping", suite.damping);
    if (s.contains("anchor_period")) suite.anchor_period = number_or(s, "anchor_period", 0.0);
    if (suite.count == 0) throw InputError("no records: the synthetic suite is empty");
    const auto base = io::parse_spectrum(s.contains("spectrum") ? s.at("spectrum") : json::object(),
                                         ctx.base_dir);
    const auto periods = io::parse_periods(s.contains("periods") ? s.at("periods") : json::object());
    records = synthetic_records(base, periods, suite);
  }
  if (records.empty()) throw InputError("no records: the record suite is empty");
  return records;
}

IDACurve ida_from_config(const Context& ctx) {
  const json& j = ctx.config;
  if (j.contains("ida")) return io::read_ida_csv(ctx.input(require_text(j, "ida")));
  auto records = load_suite(ctx);
  const auto model = io::parse_model(require(j, "model"));
  const auto lambdas = io::parse_lambdas(require(j, "lambdas"));
  return run_ida(model, records, lambdas, edp_field(j), analysis_options(j), ctx.workers);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_generate(Context& ctx) {
  const json& j = ctx.config;
  auto problem = io::parse_problem(j, ctx.base_dir);
  const auto tolerance = io::parse_tolerance(j.contains("verification") ? j.at("verification") : json::object());
  if (ctx.options.workers || std::getenv("ETFORGE_WORKERS") || !j.contains("workers")) problem.workers = ctx.workers;
  const std::uint64_t seed = ctx.options.seed.value_or(kDefaultSeed);

  const auto start = std::chrono::steady_clock::now();
  const auto result = generate(problem, seed);
  const double generation_seconds = seconds_since(start);
  const auto& report = result.report;

  const auto verify_start = std::chrono::steady_clock::now();
  const auto verification = verify_etef(result.record, problem.target, tolerance, problem.damping);
  const double verification_seconds = seconds_since(verify_start);

  const auto peaks = peak_metrics(result.record);
  const auto cav = compute_cav(result.record);
  json summary = io::to_json(report);
  summary["name"] = problem.name;
  summary["seed"] = seed;
  summary["record"] = "record.csv";
  summary["samples"] = result.record.size();
  summary["dt"] = result.record.dt();
  summary["peak_metrics"] = {{"pga", peaks.pga}, {"pgv", peaks.pgv}, {"pgd", peaks.pgd}};
  summary["cav_final"] = cav.back();
  summary["verification_passed"] = verification.passed;

  io::write_record_csv(ctx.output("record.csv"), result.record);
  io::write_json(ctx.output("report.json"), summary);
  io::write_spectrum_csv(ctx.output("residuals_acceleration.csv"), report.final_residuals.acceleration);
  io::write_spectrum_csv(ctx.output("residuals_displacement.csv"), report.final_residuals.displacement);
  io::write_json(ctx.output("verification.json"), io::to_json(verification));
  io::write_json(ctx.output("timings.json"), json{{"generation_seconds", generation_seconds},
                                                   {"verification_seconds", verification_seconds},
                                                   {"iteration_seconds", report.iteration_seconds}});

  ctx.say("generate: " + std::string(to_string(report.termination)) + " after " +
          std::to_string(report.objective_history.size() - 1) + " iterations, objective " +
          io::format_fixed(report.seed_objective) + " -> " + io::format_fixed(report.final_objective));
  ctx.say("verify: misfit " + io::format_fixed(verification.misfit_at_target) + ", ratio fraction " +
          io::format_fixed(verification.gated_fraction) + (verification.passed ? " (pass)" : " (fail)"));
  return report.termination == Termination::Stalled ? kExitStalled : kExitOk;
}

int cmd_spectra(Context& ctx) {
  const json& j = ctx.config;
  allow_keys(j, {"record", "periods", "checkpoints", "damping"});
  const auto record = load_record(ctx, "record");
  const auto periods = io::parse_periods(j.contains("periods") ? j.at("periods") : json::object());
  const auto checkpoints =
      io::parse_checkpoints(j.contains("checkpoints") ? j.at("checkpoints") : json::object(), record.duration());
  const double damping = number_or(j, "damping", kDefaultDamping);
  const auto spectra = response_spectra(record, periods, checkpoints, damping, ctx.workers);
  io::write_spectrum_csv(ctx.output("spectrum_acceleration.csv"), spectra.acceleration);
  io::write_spectrum_csv(ctx.output("spectrum_displacement.csv"), spectra.displacement);
  ctx.say("spectra: " + std::to_string(periods.size()) + " periods x " + std::to_string(checkpoints.size()) +
          " checkpoints");
  return kExitOk;
}

int cmd_analyze(Context& ctx) {
  const json& j = ctx.config;
  allow_keys(j, {"etef", "model", "edp", "profile", "collapse_drift", "sdof_height", "limits"});
  const auto etef = load_record(ctx, "etef");
  const auto model = io::parse_model(require(j, "model"));
  const auto profile = profile_for(j, &etef);
  const auto curve = run_et_analysis(model, etef, edp_field(j), analysis_options(j));
  std::vector<PerformanceCheck> checks;
  if (j.contains("limits")) {
    const auto limits = io::parse_limits(j.at("limits"));
    checks = check_performance(curve, profile, limits);
  }
  io::write_et_curve_csv(ctx.output("et_curve.csv"), curve, profile);
  io::write_json(ctx.output("et_summary.json"), io::to_json(curve, checks));
  ctx.say("analyze: peak " + curve.edp + " " + io::format_fixed(curve.values.back()) +
          (curve.collapsed() ? ", collapsed at t = " + io::format_fixed(*curve.collapse_time) : ""));
  for (const auto& c : checks) {
    ctx.say("  " + c.limit.label + ": demand " + io::format_fixed(c.demand) + " vs cap " +
            io::format_fixed(c.limit.cap) + (c.passed ? " (pass)" : " (fail)"));
  }
  return kExitOk;
}

int cmd_ida(Context& ctx) {
  allow_keys(ctx.config, {"model", "edp", "lambdas", "records", "synthetic", "collapse_drift", "sdof_height"});
  const auto ida = ida_from_config(ctx);
  io::write_ida_csv(ctx.output("ida.csv"), ida);
  io::write_json(ctx.output("ida_summary.json"), io::to_json(ida));
  ctx.say("ida: " + std::to_string(ida.record_ids.size()) + " records x " + std::to_string(ida.lambdas.size()) +
          " scale factors");
  return kExitOk;
}

int cmd_compare(Context& ctx) {
  const json& j = ctx.config;
  allow_keys(j, {"etef", "et_curve", "profile", "model", "edp", "lambdas", "records", "synthetic", "ida",
                 "collapse_drift", "sdof_height"});
  if (j.contains("etef") == j.contains("et_curve")) {
    throw InputError("config: give exactly one of 'etef' or 'et_curve'");
  }
  std::optional<AccelerationRecord> etef;
  ETCurve curve;
  if (j.contains("etef")) {
    etef = load_record(ctx, "etef");
    curve = run_et_analysis(io::parse_model(require(j, "model")), *etef, edp_field(j), analysis_options(j));
  } else {
    curve = io::read_et_curve_csv(ctx.input(require_text(j, "et_curve")));
  }
  const auto profile = profile_for(j, etef ? &*etef : nullptr);
  const auto ida = ida_from_config(ctx);
  const auto report = compare_et_vs_ida(curve, profile, ida);
  io::write_et_curve_csv(ctx.output("et_curve.csv"), curve, profile);
  io::write_ida_csv(ctx.output("ida.csv"), ida);
  io::write_json(ctx.output("comparison.json"), io::to_json(report));
  ctx.say("compare: correlation " + io::format_fixed(report.correlation) + ", mean relative error " +
          io::format_fixed(report.mean_relative_error));
  return kExitOk;
}

int cmd_verify(Context& ctx) {
  const json& j = ctx.config;
  allow_keys(j, {"etef", "target", "verification", "damping"});
  const auto etef = load_record(ctx, "etef");
  const auto target = io::parse_target(j.contains("target") ? j.at("target") : json::object(), etef.duration(),
                                       ctx.base_dir);
  const auto tolerance = io::parse_tolerance(j.contains("verification") ? j.at("verification") : json::object());
  const auto report = verify_etef(etef, target, tolerance, number_or(j, "damping", kDefaultDamping));
  io::write_json(ctx.output("verification.json"), io::to_json(report));
  ctx.say("verify: misfit " + io::format_fixed(report.misfit_at_target) + ", ratio fraction " +
          io::format_fixed(report.gated_fraction) + (report.passed ? " (pass)" : " (fail)"));
  return report.passed ? kExitOk : kExitStalled;
}

int resolve_workers(const Options& options) {
  if (options.workers) {
    if (*options.workers < 1) throw InputError("--workers must be at least 1");
    return *options.workers;
  }
  if (const char* env = std::getenv("ETFORGE_WORKERS"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw InputError("ETFORGE_WORKERS must be a positive integer, got '" + std::string(env) + "'");
  }
  return 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Endurance time excitation generation and analysis"};
  app.name("etforge");
  app.require_subcommand(1);

  Options options;
  using Command = int (*)(Context&);
  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"generate", {"Fit an endurance time excitation to a target", cmd_generate}},
      {"spectra", {"Running response spectra of a record", cmd_spectra}},
      {"analyze", {"ET analysis of a structural model", cmd_analyze}},
      {"ida", {"Incremental dynamic analysis over a record suite", cmd_ida}},
      {"compare", {"ET curve versus IDA fractiles", cmd_compare}},
      {"verify", {"Check an excitation against its target", cmd_verify}},
  };
  std::vector<std::pair<CLI::App*, Command>> subcommands;
  for (const auto& [name, info] : commands) {
    auto* sub = app.add_subcommand(name, info.first);
    sub->add_option("--config", options.config, "JSON configuration file")->required();
    sub->add_option("--out", options.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", options.seed, "Random seed");
    sub->add_option("--workers", options.workers, "Worker threads (fallback: ETFORGE_WORKERS)");
    sub->add_flag("--quiet", options.quiet, "Suppress progress output");
    subcommands.emplace_back(sub, info.second);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    Context ctx{options, {}, {}, fs::path(options.out), 1, out};
    ctx.workers = resolve_workers(options);
    const fs::path config_path(options.config);
    ctx.config = io::read_json(config_path);
    ctx.base_dir = config_path.parent_path();
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir)) {
      throw InputError("cannot create output directory '" + ctx.out_dir.string() + "'");
    }
    for (const auto& [sub, command] : subcommands) {
      if (sub->parsed()) return command(ctx);
    }
    return kExitInput;
  } catch (const InputError& e) {
    err << "etforge: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "etforge: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace etforge::cli
