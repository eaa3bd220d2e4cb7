#include "etforge/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace etforge::io {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view text, const std::string& where) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InputError(where + ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json numbers(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

std::vector<double> numbers_from(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number_or_nan(v));
  return out;
}

Termination parse_termination(std::string_view name) {
  for (auto t : {Termination::ZeroObjective, Termination::ObjectiveTolerance,
                 Termination::StepTolerance, Termination::IterationLimit, Termination::Stalled}) {
    if (to_string(t) == name) return t;
  }
  throw InputError("unknown termination reason '" + std::string(name) + "'");
}

// A JSON object being read as config, remembering its path for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  const std::string& path() const { return path_; }
  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  [[noreturn]] void fail(const std::string& message) const {
    throw InputError("config field '" + (path_.empty() ? std::string("<root>") : path_) +
                     "': " + message);
  }
  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    throw InputError("config field '" + field(key) + "': " + message);
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, _] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(key, "unknown field");
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }
  const json& raw(std::string_view key) const {
    if (!has(key)) fail(key, "missing");
    return j_.at(key);
  }
  Node child(std::string_view key) const { return Node(raw(key), field(key)); }

  double number(std::string_view key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double number(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  long long integer(std::string_view key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long long>();
  }
  long long integer(std::string_view key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
  }
  std::size_t count(std::string_view key) const {
    const long long v = integer(key);
    if (v < 0) fail(key, "must be non-negative");
    return static_cast<std::size_t>(v);
  }
  std::size_t count(std::string_view key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
  }
  std::string text(std::string_view key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string text(std::string_view key, std::string fallback) const {
    return has(key) ? text(key) : fallback;
  }
  std::vector<double> number_list(std::string_view key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "element " + std::to_string(i) + " is not a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  // Runs `f`, prefixing library validation errors with this node's path.
  template <class F>
  auto guard(F&& f) const -> decltype(f()) {
    try {
      return f();
    } catch (const InputError& e) {
      fail(e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
};

template <class Parse>
auto enum_field(const Node& node, std::string_view key, Parse parse) {
  const std::string name = node.text(key);
  try {
    return parse(name);
  } catch (const std::exception& e) {
    node.fail(key, e.what());
  }
}

fs::path resolve(const fs::path& base_dir, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

}  // namespace

std::string format_exact(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void write_record_csv(std::ostream& out, const AccelerationRecord& record) {
  const std::string name = record.name().empty() ? "record" : record.name();
  out << "# name=" << name << " dt=" << format_exact(record.dt()) << " units=m/s2";
  for (const auto& [key, value] : record.meta()) {
    std::string v = value;
    std::replace_if(v.begin(), v.end(), [](char c) { return c == ' ' || c == '\t'; }, '_');
    out << ' ' << key << '=' << v;
  }
  out << '\n';
  for (double a : record.samples()) out << format_exact(a) << '\n';
}

void write_record_csv(const fs::path& path, const AccelerationRecord& record) {
  auto out = open_out(path);
  write_record_csv(out, record);
}

AccelerationRecord read_record_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::string name;
  double dt = 0.0;
  bool have_dt = false;
  std::map<std::string, std::string> meta;
  std::vector<double> samples;
  while (next_line(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (!header) {
      if (text.front() != '#') throw InputError(at_line(source, line_no) + ": missing '# name=... dt=...' header");
      header = true;
      std::istringstream tokens{std::string(text.substr(1))};
      std::string token;
      while (tokens >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw InputError(at_line(source, line_no) + ": malformed header token '" + token + "'");
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "name") {
          name = value;
        } else if (key == "dt") {
          dt = parse_double(value, at_line(source, line_no) + " dt");
          have_dt = true;
        } else if (key == "units") {
          if (value != "m/s2") throw InputError(at_line(source, line_no) + ": units must be m/s2");
        } else {
          meta[key] = value;
        }
      }
      if (!have_dt) throw InputError(at_line(source, line_no) + ": header lacks dt");
      continue;
    }
    if (text.front() == '#') continue;
    samples.push_back(parse_double(text, at_line(source, line_no)));
  }
  if (!header) throw InputError(source + ": empty record file");
  try {
    return AccelerationRecord(dt, std::move(samples), name, std::move(meta));
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
}

AccelerationRecord read_record_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_record_csv(in, path.string());
}

void write_spectrum_csv(std::ostream& out, const RunningSpectrum& spectrum) {
  out << "period";
  for (double t : spectrum.times) out << '\t' << format_fixed(t);
  out << '\n';
  for (std::size_t j = 0; j < spectrum.periods.size(); ++j) {
    out << format_fixed(spectrum.periods[j]);
    for (std::size_t k = 0; k < spectrum.times.size(); ++k) out << '\t' << format_fixed(spectrum.at(j, k));
    out << '\n';
  }
}

void write_spectrum_csv(const fs::path& path, const RunningSpectrum& spectrum) {
  auto out = open_out(path);
  write_spectrum_csv(out, spectrum);
}

RunningSpectrum read_spectrum_csv(std::istream& in, SpectrumKind kind) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> times;
  std::vector<double> periods;
  std::vector<double> values;
  bool header = false;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, '\t');
    const std::string where = "spectrum line " + std::to_string(line_no);
    if (!header) {
      if (cells.front() != "period") throw InputError(where + ": header must start with 'period'");
      for (std::size_t c = 1; c < cells.size(); ++c) times.push_back(parse_double(cells[c], where));
      header = true;
      continue;
    }
    if (cells.size() != times.size() + 1) throw InputError(where + ": wrong number of columns");
    periods.push_back(parse_double(cells[0], where));
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_double(cells[c], where));
  }
  if (!header) throw InputError("spectrum file is empty");
  RunningSpectrum s(kind, std::move(periods), std::move(times));
  s.values = std::move(values);
  return s;
}

RunningSpectrum read_spectrum_csv(const fs::path& path, SpectrumKind kind) {
  auto in = open_in(path);
  return read_spectrum_csv(in, kind);
}

BaseTargetSpectrum read_tabulated_spectrum(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> periods;
  std::vector<double> values;
  while (next_line(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto cells = split(text, ',');
    if (line_no == 1 && cells.front() == "period") continue;
    const std::string where = at_line(path.string(), line_no);
    if (cells.size() != 2) throw InputError(where + ": expected 'period,value'");
    periods.push_back(parse_double(cells[0], where));
    values.push_back(parse_double(cells[1], where));
  }
  try {
    return BaseTargetSpectrum::tabulated(std::move(periods), std::move(values));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_et_curve_csv(std::ostream& out, const ETCurve& curve, const IntensifyingProfile& profile) {
  out << "t,lambda,edp\n";
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    out << format_exact(curve.times[i]) << ',' << format_exact(profile.value(curve.times[i])) << ','
        << format_exact(curve.values[i]) << '\n';
  }
}

void write_et_curve_csv(const fs::path& path, const ETCurve& curve, const IntensifyingProfile& profile) {
  auto out = open_out(path);
  write_et_curve_csv(out, curve, profile);
}

ETCurve read_et_curve_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  ETCurve curve;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = "ET curve line " + std::to_string(line_no);
    if (line_no == 1) {
      if (cells.size() != 3 || cells[0] != "t") throw InputError(where + ": expected header 't,lambda,edp'");
      continue;
    }
    if (cells.size() != 3) throw InputError(where + ": expected 3 columns");
    curve.times.push_back(parse_double(cells[0], where));
    curve.values.push_back(parse_double(cells[2], where));
  }
  if (curve.times.empty()) throw InputError("ET curve file has no rows");
  return curve;
}

ETCurve read_et_curve_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_et_curve_csv(in);
}

void write_ida_csv(std::ostream& out, const IDACurve& ida) {
  out << "lambda,record_id,edp,collapsed\n";
  for (std::size_t r = 0; r < ida.record_ids.size(); ++r) {
    for (std::size_t l = 0; l < ida.lambdas.size(); ++l) {
      out << format_exact(ida.lambdas[l]) << ',' << ida.record_ids[r] << ','
          << format_exact(ida.edp[r][l]) << ',' << (ida.collapsed[r][l] ? 1 : 0) << '\n';
    }
  }
}

void write_ida_csv(const fs::path& path, const IDACurve& ida) {
  auto out = open_out(path);
  write_ida_csv(out, ida);
}

IDACurve read_ida_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  struct Cell {
    double edp;
    bool collapsed;
  };
  std::vector<double> lambdas;
  std::vector<std::string> ids;
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto row = split(line, ',');
    const std::string where = "IDA line " + std::to_string(line_no);
    if (line_no == 1) {
      if (row.size() != 4 || row[0] != "lambda") {
        throw InputError(where + ": expected header 'lambda,record_id,edp,collapsed'");
      }
      continue;
    }
    if (row.size() != 4) throw InputError(where + ": expected 4 columns");
    const double lambda = parse_double(row[0], where);
    const std::string id(row[1]);
    auto lit = std::find(lambdas.begin(), lambdas.end(), lambda);
    if (lit == lambdas.end()) lit = lambdas.insert(lambdas.end(), lambda);
    auto rit = std::find(ids.begin(), ids.end(), id);
    if (rit == ids.end()) rit = ids.insert(ids.end(), id);
    if (row[3] != "0" && row[3] != "1") throw InputError(where + ": collapsed must be 0 or 1");
    const auto key = std::make_pair(static_cast<std::size_t>(rit - ids.begin()),
                                    static_cast<std::size_t>(lit - lambdas.begin()));
    if (!cells.emplace(key, Cell{parse_double(row[2], where), row[3] == "1"}).second) {
      throw InputError(where + ": duplicate (lambda, record) pair");
    }
  }
  if (ids.empty()) throw InputError("IDA file: no records");
  if (cells.size() != ids.size() * lambdas.size()) {
    throw InputError("IDA file: every record needs a row for every scale factor");
  }
  IDACurve ida;
  ida.lambdas = lambdas;
  ida.record_ids = ids;
  ida.edp.assign(ids.size(), std::vector<double>(lambdas.size()));
  ida.collapsed.assign(ids.size(), std::vector<bool>(lambdas.size()));
  for (const auto& [key, cell] : cells) {
    ida.edp[key.first][key.second] = cell.edp;
    ida.collapsed[key.first][key.second] = cell.collapsed;
  }
  ida.summarise();
  return ida;
}

IDACurve read_ida_csv(const fs::path& path) {
  auto in = open_in(path);
  return read_ida_csv(in);
}

json to_json(const GenerationReport& report) {
  return json{{"objective_history", numbers(report.objective_history)},
              {"iterations", report.objective_history.empty() ? 0 : report.objective_history.size() - 1},
              {"termination", std::string(to_string(report.termination))},
              {"alpha", number(report.alpha)},
              {"seed_objective", number(report.seed_objective)},
              {"final_objective", number(report.final_objective)},
              {"variables", report.variables},
              {"residuals", report.residuals},
              {"floored_cells", report.floored_cells},
              {"space", std::string(to_string(report.space))}};
}

GenerationReport generation_report_from_json(const json& j) {
  try {
    GenerationReport r;
    r.objective_history = numbers_from(j.at("objective_history"));
    r.termination = parse_termination(j.at("termination").get<std::string>());
    r.alpha = number_or_nan(j.at("alpha"));
    r.seed_objective = number_or_nan(j.at("seed_objective"));
    r.final_objective = number_or_nan(j.at("final_objective"));
    r.variables = j.at("variables").get<std::size_t>();
    r.residuals = j.at("residuals").get<std::size_t>();
    r.floored_cells = j.at("floored_cells").get<std::size_t>();
    r.space = parse_variable_space(j.at("space").get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("generation report: ") + e.what());
  }
}

json to_json(const VerificationReport& report) {
  json ratios = json::array();
  for (const auto& row : report.ratios) ratios.push_back(numbers(row));
  return json{{"periods", numbers(report.periods)},
              {"times", numbers(report.times)},
              {"intensities", numbers(report.intensities)},
              {"mean_misfit", numbers(report.mean_misfit)},
              {"ratios", ratios},
              {"ratio_fraction_in_band", numbers(report.ratio_fraction_in_band)},
              {"target_time", report.target_time},
              {"misfit_at_target", number(report.misfit_at_target)},
              {"gated_time", report.gated_time ? json(*report.gated_time) : json(nullptr)},
              {"gated_fraction", number(report.gated_fraction)},
              {"misfit_ok", report.misfit_ok},
              {"ratio_ok", report.ratio_ok},
              {"passed", report.passed}};
}

json to_json(const ComparisonReport& report) {
  return json{{"lambdas", numbers(report.lambdas)},
              {"times", numbers(report.times)},
              {"et", numbers(report.et)},
              {"median", numbers(report.median)},
              {"correlation", number(report.correlation)},
              {"mean_relative_error", number(report.mean_relative_error)},
              {"mean_deviation_p16", number(report.mean_deviation_p16)},
              {"mean_deviation_p50", number(report.mean_deviation_p50)},
              {"mean_deviation_p84", number(report.mean_deviation_p84)}};
}

ComparisonReport comparison_report_from_json(const json& j) {
  try {
    ComparisonReport r;
    r.lambdas = numbers_from(j.at("lambdas"));
    r.times = numbers_from(j.at("times"));
    r.et = numbers_from(j.at("et"));
    r.median = numbers_from(j.at("median"));
    r.correlation = number_or_nan(j.at("correlation"));
    r.mean_relative_error = number_or_nan(j.at("mean_relative_error"));
    r.mean_deviation_p16 = number_or_nan(j.at("mean_deviation_p16"));
    r.mean_deviation_p50 = number_or_nan(j.at("mean_deviation_p50"));
    r.mean_deviation_p84 = number_or_nan(j.at("mean_deviation_p84"));
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("comparison report: ") + e.what());
  }
}

json to_json(const ETCurve& curve, std::span<const PerformanceCheck> checks) {
  json perf = json::array();
  for (const auto& c : checks) {
    perf.push_back({{"label", c.limit.label},
                    {"lambda", c.limit.lambda},
                    {"cap", c.limit.cap},
                    {"time", number(c.time)},
                    {"demand", number(c.demand)},
                    {"passed", c.passed}});
  }
  return json{{"edp", curve.edp},
              {"samples", curve.times.size()},
              {"duration", curve.times.empty() ? 0.0 : curve.times.back()},
              {"peak", curve.values.empty() ? 0.0 : curve.values.back()},
              {"collapsed", curve.collapsed()},
              {"collapse_time", curve.collapse_time ? json(*curve.collapse_time) : json(nullptr)},
              {"performance", perf}};
}

json to_json(const IDACurve& ida) {
  std::size_t collapses = 0;
  for (const auto& row : ida.collapsed) collapses += static_cast<std::size_t>(std::count(row.begin(), row.end(), true));
  return json{{"lambdas", numbers(ida.lambdas)},
              {"record_ids", ida.record_ids},
              {"p16", numbers(ida.p16)},
              {"p50", numbers(ida.p50)},
              {"p84", numbers(ida.p84)},
              {"collapsed_cells", collapses}};
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; translate it to a line number.
    std::ifstream again(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
    const std::size_t offset = std::min(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
    throw InputError(path.string() + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

BaseTargetSpectrum parse_spectrum(const json& j, const fs::path& base_dir) {
  const Node n(j, "target.spectrum");
  const std::string kind = n.text("kind", "parametric");
  if (kind == "parametric") {
    n.allow({"kind", "plateau", "corner_short", "corner_long", "decay_exponent"});
    return n.guard([&] {
      return BaseTargetSpectrum::parametric(n.number("plateau", 7.5), n.number("corner_short", 0.15),
                                            n.number("corner_long", 0.6),
                                            n.number("decay_exponent", 1.0));
    });
  }
  if (kind == "tabulated") {
    n.allow({"kind", "csv", "points"});
    if (n.has("csv")) return n.guard([&] { return read_tabulated_spectrum(resolve(base_dir, n.text("csv"))); });
    const json& pts = n.raw("points");
    if (!pts.is_array()) n.fail("points", "expected [[period, value], ...]");
    std::vector<double> periods;
    std::vector<double> values;
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        n.fail("points", "expected [[period, value], ...]");
      }
      periods.push_back(p[0].get<double>());
      values.push_back(p[1].get<double>());
    }
    return n.guard([&] { return BaseTargetSpectrum::tabulated(periods, values); });
  }
  n.fail("kind", "expected 'parametric' or 'tabulated'");
}

IntensifyingProfile parse_profile(const json& j) {
  const Node n(j, "target.profile");
  const std::string kind = n.text("kind", "linear");
  if (kind == "linear") {
    n.allow({"kind", "target_time"});
    return n.guard([&] { return IntensifyingProfile::linear(n.number("target_time", 10.0)); });
  }
  if (kind == "exponential") {
    n.allow({"kind", "target_time", "b", "gamma", "alpha"});
    return n.guard([&] {
      const double t = n.number("target_time");
      if (n.has("b")) return IntensifyingProfile::exponential(t, n.number("b"), n.number("gamma"), n.number("alpha"));
      return calibrate_exponential(t, n.number("gamma"), n.number("alpha"));
    });
  }
  n.fail("kind", "expected 'linear' or 'exponential'");
}

std::vector<double> parse_periods(const json& j) {
  if (j.is_array()) {
    const json holder{{"periods", j}};
    return Node(holder, "target").number_list("periods");
  }
  const Node n(j, "target.periods");
  n.allow({"min", "max", "count", "spacing"});
  const auto spacing = n.has("spacing") ? enum_field(n, "spacing", parse_grid_spacing) : GridSpacing::Log;
  return n.guard([&] {
    return make_period_grid(n.number("min", 0.1), n.number("max", 4.0), n.count("count", 30), spacing);
  });
}

std::vector<double> parse_checkpoints(const json& j, double duration) {
  if (j.is_array()) {
    const json holder{{"checkpoints", j}};
    return Node(holder, "target").number_list("checkpoints");
  }
  const Node n(j, "target.checkpoints");
  n.allow({"count"});
  return n.guard([&] { return uniform_checkpoints(duration, n.count("count", 8)); });
}

TargetModel parse_target(const json& j, double duration, const fs::path& base_dir) {
  const Node n(j, "target");
  n.allow({"spectrum", "profile", "periods", "checkpoints"});
  TargetModel t;
  if (n.has("spectrum")) t.base = parse_spectrum(n.raw("spectrum"), base_dir);
  if (n.has("profile")) t.profile = parse_profile(n.raw("profile"));
  t.periods = parse_periods(n.has("periods") ? n.raw("periods") : json::object());
  t.checkpoints = parse_checkpoints(n.has("checkpoints") ? n.raw("checkpoints") : json::object(), duration);
  return t;
}

GenerationProblem parse_problem(const json& j, const fs::path& base_dir) {
  const Node n(j, "");
  n.allow({"name", "duration", "dt", "damping", "space", "wavelet", "alpha", "residual", "optimizer",
           "workers", "target", "verification"});
  GenerationProblem p;
  p.name = n.text("name", p.name);
  if (p.name.empty() || p.name.find_first_of(" \t,=") != std::string::npos) {
    n.fail("name", "must be non-empty without spaces, commas or '='");
  }
  p.duration = n.number("duration", p.duration);
  p.dt = n.number("dt", p.dt);
  p.damping = n.number("damping", p.damping);
  if (n.has("space")) p.space = enum_field(n, "space", parse_variable_space);
  if (n.has("residual")) p.residual = enum_field(n, "residual", parse_residual_kind);
  if (n.has("wavelet")) {
    const Node w = n.child("wavelet");
    w.allow({"basis", "levels", "masked_levels"});
    if (w.has("basis")) p.basis = enum_field(w, "basis", parse_wavelet_basis);
    p.wavelet_levels = static_cast<int>(w.integer("levels", p.wavelet_levels));
    if (w.has("masked_levels")) {
      p.masked_levels.clear();
      for (double v : w.number_list("masked_levels")) {
        if (v != std::floor(v)) w.fail("masked_levels", "levels must be integers");
        p.masked_levels.push_back(static_cast<int>(v));
      }
    }
  }
  if (n.has("alpha")) {
    const json& a = n.raw("alpha");
    if (a.is_string() && a.get<std::string>() == "auto") {
      p.alpha.reset();
    } else if (a.is_number()) {
      p.alpha = a.get<double>();
    } else {
      n.fail("alpha", "expected a number or \"auto\"");
    }
  }
  if (n.has("optimizer")) {
    const Node o = n.child("optimizer");
    o.allow({"max_iterations", "step_tolerance", "objective_tolerance", "max_damping_trials"});
    p.optimizer.max_iterations = static_cast<int>(o.integer("max_iterations", p.optimizer.max_iterations));
    p.optimizer.step_tolerance = o.number("step_tolerance", p.optimizer.step_tolerance);
    p.optimizer.objective_tolerance = o.number("objective_tolerance", p.optimizer.objective_tolerance);
    p.optimizer.max_damping_trials =
        static_cast<int>(o.integer("max_damping_trials", p.optimizer.max_damping_trials));
  }
  p.workers = static_cast<int>(n.integer("workers", p.workers));
  p.target = parse_target(n.has("target") ? n.raw("target") : json::object(), p.duration, base_dir);
  n.guard([&] { p.validate(); });
  return p;
}

VerificationTolerance parse_tolerance(const json& j) {
  const Node n(j, "verification");
  n.allow({"misfit", "ratio_band", "ratio_min_fraction", "ratio_intensity"});
  VerificationTolerance t;
  t.misfit = n.number("misfit", t.misfit);
  t.ratio_band = n.number("ratio_band", t.ratio_band);
  t.ratio_min_fraction = n.number("ratio_min_fraction", t.ratio_min_fraction);
  t.ratio_intensity = n.number("ratio_intensity", t.ratio_intensity);
  if (!(t.misfit > 0.0) || !(t.ratio_band > 0.0) || !(t.ratio_min_fraction >= 0.0) ||
      !(t.ratio_min_fraction <= 1.0) || !(t.ratio_intensity > 0.0)) {
    n.fail("tolerances must be positive and the fraction within [0, 1]");
  }
  return t;
}

StructuralModel parse_model(const json& j) {
  const Node n(j, "model");
  const std::string kind = n.text("kind");
  if (kind == "sdof") {
    n.allow({"kind", "period", "damping", "hysteresis", "yield_strength", "post_yield_ratio"});
    SDOFModel m;
    m.period = n.number("period");
    m.damping = n.number("damping", kDefaultDamping);
    if (n.has("hysteresis")) m.hysteresis = enum_field(n, "hysteresis", parse_hysteresis);
    m.yield_strength = n.number("yield_strength", 0.0);
    m.post_yield_ratio = n.number("post_yield_ratio", 0.0);
    n.guard([&] { m.validate(); });
    return m;
  }
  if (kind == "shear-building") {
    n.allow({"kind", "damping", "uniform", "stories"});
    const double damping = n.number("damping", kDefaultDamping);
    if (n.has("uniform") == n.has("stories")) n.fail("give exactly one of 'uniform' or 'stories'");
    if (n.has("uniform")) {
      const Node u = n.child("uniform");
      u.allow({"count", "first_period", "hysteresis", "yield_drift", "post_yield_ratio", "height"});
      const auto hysteresis = u.has("hysteresis") ? enum_field(u, "hysteresis", parse_hysteresis)
                                                  : Hysteresis::Linear;
      return u.guard([&] {
        return ShearBuildingModel::uniform(u.count("count"), u.number("first_period"), hysteresis,
                                           u.number("yield_drift", 0.01),
                                           u.number("post_yield_ratio", 0.0), damping,
                                           u.number("height", 3.0));
      });
    }
    const json& list = n.raw("stories");
    if (!list.is_array()) n.fail("stories", "expected an array of stories");
    ShearBuildingModel m;
    m.damping = damping;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Node s(list[i], "model.stories[" + std::to_string(i) + "]");
      s.allow({"mass", "stiffness", "height", "hysteresis", "yield_drift", "post_yield_ratio"});
      Story story;
      story.mass = s.number("mass", story.mass);
      story.stiffness = s.number("stiffness");
      story.height = s.number("height", story.height);
      if (s.has("hysteresis")) story.hysteresis = enum_field(s, "hysteresis", parse_hysteresis);
      story.yield_drift = s.number("yield_drift", story.yield_drift);
      story.post_yield_ratio = s.number("post_yield_ratio", story.post_yield_ratio);
      m.stories.push_back(story);
    }
    n.guard([&] { m.validate(); });
    return m;
  }
  n.fail("kind", "expected 'sdof' or 'shear-building'");
}

std::vector<double> parse_lambdas(const json& j) {
  if (j.is_array()) {
    const json holder{{"lambdas", j}};
    return Node(holder, "").number_list("lambdas");
  }
  const Node n(j, "lambdas");
  n.allow({"start", "stop", "step"});
  const double start = n.number("start");
  const double stop = n.number("stop");
  const double step = n.number("step");
  if (!(step > 0.0) || !(stop >= start)) n.fail("need step > 0 and stop >= start");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::vector<PerformanceLimit> parse_limits(const json& j) {
  if (!j.is_array()) throw InputError("config field 'limits': expected an array");
  std::vector<PerformanceLimit> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Node n(j[i], "limits[" + std::to_string(i) + "]");
    n.allow({"lambda", "cap", "label"});
    out.push_back({n.number("lambda"), n.number("cap"), n.text("label", "level-" + std::to_string(i + 1))});
  }
  return out;
}

}  // namespace etforge::io
