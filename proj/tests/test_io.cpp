#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

#include "etforge/io.hpp"
#include "support.hpp"

using namespace etforge;
using etforge::testing::random_signal;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("etforge-io-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("record CSV round trips exactly with metadata") {
  const AccelerationRecord r(0.02, random_signal(300, 1), "ETA20-custom-01", {{"profile", "linear"}, {"target_time", "10"}});
  std::stringstream buffer;
  io::write_record_csv(buffer, r);
  const std::string text = buffer.str();
  CHECK(text.rfind("# name=ETA20-custom-01 dt=0.02 units=m/s2", 0) == 0);
  const auto back = io::read_record_csv(buffer);
  CHECK(back.name() == r.name());
  CHECK(back.dt() == r.dt());
  CHECK(back.samples() == r.samples());
  CHECK(back.meta() == r.meta());
}

TEST_CASE("record CSV accepts CRLF and blank lines") {
  std::istringstream crlf("# name=a dt=0.01 units=m/s2\r\n0\r\n1.5\r\n\r\n-2\r\n");
  const auto r = io::read_record_csv(crlf);
  CHECK(r.samples() == std::vector<double>{0.0, 1.5, -2.0});
  CHECK(r.dt() == 0.01);
}

TEST_CASE("record CSV diagnostics name the line") {
  std::istringstream no_header("0\n1\n");
  CHECK(contains(error_of([&] { io::read_record_csv(no_header, "f.csv"); }), "f.csv:1"));
  std::istringstream bad_value("# name=a dt=0.01 units=m/s2\n0\nabc\n");
  CHECK(contains(error_of([&] { io::read_record_csv(bad_value, "f.csv"); }), "f.csv:3"));
  std::istringstream no_dt("# name=a units=m/s2\n0\n1\n");
  CHECK(contains(error_of([&] { io::read_record_csv(no_dt, "f.csv"); }), "dt"));
  std::istringstream units("# name=a dt=0.01 units=g\n0\n1\n");
  CHECK(contains(error_of([&] { io::read_record_csv(units, "f.csv"); }), "m/s2"));
  CHECK(contains(error_of([&] { io::read_record_csv(fs::path("/nonexistent/r.csv")); }), "/nonexistent/r.csv"));
}

TEST_CASE("spectrum CSV round trips to ten significant digits") {
  const AccelerationRecord r(0.02, random_signal(501, 4));
  const std::vector<double> periods{0.1, 0.5, 2.0};
  const std::vector<double> checkpoints{2.5, 5.0, 10.0};
  const auto s = response_spectra(r, periods, checkpoints);
  std::stringstream buffer;
  io::write_spectrum_csv(buffer, s.acceleration);
  CHECK(buffer.str().rfind("period\t2.5\t5\t10\n", 0) == 0);
  const auto back = io::read_spectrum_csv(buffer, SpectrumKind::Acceleration);
  CHECK(back.periods == periods);
  CHECK(back.times == checkpoints);
  for (std::size_t i = 0; i < s.acceleration.values.size(); ++i) {
    CHECK(back.values[i] == doctest::Approx(s.acceleration.values[i]).epsilon(1e-9));
  }
  std::stringstream again;
  io::write_spectrum_csv(again, back);
  std::stringstream first;
  io::write_spectrum_csv(first, s.acceleration);
  CHECK(again.str() == first.str());
}

TEST_CASE("ET curve and IDA CSV round trip") {
  const auto profile = IntensifyingProfile::linear(10.0);
  const auto curve = envelope(random_signal(200, 2), 0.1, "drift");
  std::stringstream et;
  io::write_et_curve_csv(et, curve, profile);
  CHECK(et.str().rfind("t,lambda,edp\n", 0) == 0);
  const auto et_back = io::read_et_curve_csv(et);
  CHECK(et_back.times == curve.times);
  CHECK(et_back.values == curve.values);

  IDACurve ida;
  ida.lambdas = {0.5, 1.0};
  ida.record_ids = {"r1", "r2", "r3"};
  ida.edp = {{0.1, 0.2}, {0.15, std::numeric_limits<double>::infinity()}, {0.12, 0.3}};
  ida.collapsed = {{false, false}, {false, true}, {false, false}};
  ida.summarise();
  std::stringstream csv;
  io::write_ida_csv(csv, ida);
  const auto back = io::read_ida_csv(csv);
  CHECK(back.lambdas == ida.lambdas);
  CHECK(back.record_ids == ida.record_ids);
  CHECK(back.edp == ida.edp);
  CHECK(back.collapsed == ida.collapsed);
  CHECK(back.p50 == ida.p50);

  std::istringstream missing("lambda,record_id,edp,collapsed\n0.5,a,0.1,0\n1,a,0.2,0\n0.5,b,0.1,0\n");
  CHECK(contains(error_of([&] { io::read_ida_csv(missing); }), "every record"));
  std::istringstream empty("lambda,record_id,edp,collapsed\n");
  CHECK(contains(error_of([&] { io::read_ida_csv(empty); }), "no records"));
}

TEST_CASE("JSON reports round trip") {
  GenerationReport g;
  g.objective_history = {10.0, 5.0, 1.25};
  g.termination = Termination::ObjectiveTolerance;
  g.alpha = 12.5;
  g.seed_objective = 10.0;
  g.final_objective = 1.25;
  g.variables = 1024;
  g.residuals = 480;
  g.space = VariableSpace::WaveletMasked;
  const auto j = io::to_json(g);
  const auto back = io::generation_report_from_json(io::json::parse(j.dump()));
  CHECK(back.objective_history == g.objective_history);
  CHECK(back.termination == g.termination);
  CHECK(back.alpha == g.alpha);
  CHECK(back.variables == g.variables);
  CHECK(back.space == g.space);
  CHECK(io::to_json(back) == j);

  ComparisonReport c;
  c.lambdas = {0.5, 1.0};
  c.times = {5.0, 10.0};
  c.et = {0.1, 0.2};
  c.median = {0.11, 0.19};
  c.correlation = 0.97;
  c.mean_relative_error = 0.07;
  const auto cj = io::to_json(c);
  CHECK(io::to_json(io::comparison_report_from_json(io::json::parse(cj.dump()))) == cj);
}

TEST_CASE("tabulated spectrum file") {
  const auto dir = scratch_dir();
  write_text(dir / "spec.csv", "period,value\r\n0.1,5\r\n1.0,4\r\n2.0,2\r\n");
  const auto s = io::read_tabulated_spectrum(dir / "spec.csv");
  CHECK(s.acceleration(1.5) == doctest::Approx(3.0));
  write_text(dir / "bad.csv", "0.1,5\n1.0\n");
  CHECK(contains(error_of([&] { io::read_tabulated_spectrum(dir / "bad.csv"); }), "bad.csv:2"));
  fs::remove_all(dir);
}

TEST_CASE("problem config defaults and overrides") {
  const auto p = io::parse_problem(io::json::object(), {});
  CHECK(p.duration == 20.48);
  CHECK(p.target.periods.size() == 30);
  CHECK(p.target.checkpoints.size() == 8);
  CHECK_FALSE(p.alpha.has_value());

  const auto j = io::json::parse(R"({
    "name": "ETA-x", "space": "wavelet-masked", "alpha": 2.5, "residual": "relative",
    "wavelet": {"basis": "haar", "levels": 5, "masked_levels": [1, 2]},
    "optimizer": {"max_iterations": 7},
    "target": {"profile": {"kind": "exponential", "target_time": 10, "gamma": 0.5, "alpha": 0.02},
               "spectrum": {"kind": "tabulated", "points": [[0.05, 3], [5, 1]]},
               "periods": [0.1, 0.2, 0.4], "checkpoints": {"count": 4}}
  })");
  const auto q = io::parse_problem(j, {});
  CHECK(q.space == VariableSpace::WaveletMasked);
  CHECK(q.basis == WaveletBasis::Haar);
  CHECK(q.masked_levels == std::vector<int>{1, 2});
  CHECK(*q.alpha == 2.5);
  CHECK(q.residual == ResidualKind::Relative);
  CHECK(q.optimizer.max_iterations == 7);
  CHECK(q.target.profile.kind() == IntensifyingProfile::Kind::Exponential);
  CHECK(q.target.periods == std::vector<double>{0.1, 0.2, 0.4});
  CHECK(q.target.checkpoints.back() == doctest::Approx(20.48));
}

TEST_CASE("config diagnostics name the field") {
  auto msg = [](const char* text) { return error_of([&] { io::parse_problem(io::json::parse(text), {}); }); };
  CHECK(contains(msg(R"({"dt": "fast"})"), "'dt'"));
  CHECK(contains(msg(R"({"space": "fourier"})"), "'space'"));
  CHECK(contains(msg(R"({"target": {"periods": {"count": "x"}}})"), "'target.periods.count'"));
  CHECK(contains(msg(R"({"target": {"profile": {"kind": "linear", "target_time": -1}}})"), "'target.profile'"));
  CHECK(contains(msg(R"({"optimiser": {}})"), "'optimiser': unknown field"));
  CHECK(contains(msg(R"({"name": "has space"})"), "'name'"));

  const auto dir = scratch_dir();
  write_text(dir / "broken.json", "{\n  \"dt\": 0.02,\n  \"duration\": \n}\n");
  const auto err = error_of([&] { io::read_json(dir / "broken.json"); });
  CHECK(contains(err, "broken.json:4"));
  fs::remove_all(dir);
}

TEST_CASE("model, lambda and limit configs") {
  const auto sdof = io::parse_model(io::json::parse(
      R"({"kind": "sdof", "period": 0.5, "hysteresis": "bilinear", "yield_strength": 5.25, "post_yield_ratio": 0.05})"));
  CHECK(std::get<SDOFModel>(sdof).yield_strength == 5.25);
  const auto building = io::parse_model(io::json::parse(
      R"({"kind": "shear-building", "uniform": {"count": 3, "first_period": 0.6, "hysteresis": "epp"}})"));
  CHECK(std::get<ShearBuildingModel>(building).stories.size() == 3);
  const auto custom = io::parse_model(io::json::parse(
      R"({"kind": "shear-building", "stories": [{"stiffness": 400}, {"stiffness": 300, "mass": 0.8}]})"));
  CHECK(std::get<ShearBuildingModel>(custom).stories[1].mass == 0.8);
  CHECK(contains(error_of([] { io::parse_model(io::json::parse(R"({"kind": "sdof", "period": -1})")); }), "'model'"));
  CHECK(contains(error_of([] { io::parse_model(io::json::parse(R"({"kind": "frame"})")); }), "'model.kind'"));

  const auto lambdas = io::parse_lambdas(io::json::parse(R"({"start": 0.25, "stop": 2.0, "step": 0.25})"));
  REQUIRE(lambdas.size() == 8);
  CHECK(lambdas.back() == doctest::Approx(2.0));
  CHECK(io::parse_lambdas(io::json::parse("[0.5, 1]")) == std::vector<double>{0.5, 1.0});

  const auto limits = io::parse_limits(io::json::parse(R"([{"lambda": 1, "cap": 0.02, "label": "LS"}])"));
  CHECK(limits[0].label == "LS");
}
