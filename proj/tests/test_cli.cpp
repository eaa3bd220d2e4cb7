#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "etforge/io.hpp"

using namespace etforge;
namespace fs = std::filesystem;

#ifndef ETFORGE_TEST_DATA
#error "ETFORGE_TEST_DATA must point at tests/data"
#endif

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "etforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("etforge-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

const fs::path kData = ETFORGE_TEST_DATA;

}  // namespace

TEST_CASE("missing config exits 1 naming the path") {
  const auto r = run({"generate", "--config", "/no/such/problem.json", "--out", scratch("missing").string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("/no/such/problem.json") != std::string::npos);
}

TEST_CASE("malformed config exits 1 with the line or field") {
  const auto dir = scratch("malformed");
  write_text(dir / "bad.json", "{\n  \"dt\": 0.02,\n  \"duration\": ,\n}\n");
  auto r = run({"generate", "--config", (dir / "bad.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("bad.json:3") != std::string::npos);

  write_text(dir / "field.json", R"({"dt": -0.02})");
  r = run({"generate", "--config", (dir / "field.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("dt") != std::string::npos);
}

TEST_CASE("usage errors and help") {
  CHECK(run({}).code == cli::kExitInput);
  CHECK(run({"generate"}).code == cli::kExitInput);
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({"frobnicate", "--config", "x"}).code == cli::kExitInput);
}

TEST_CASE("generate is byte-deterministic and its artifacts round trip") {
  const auto a = scratch("gen-a");
  const auto b = scratch("gen-b");
  const auto config = (kData / "small_generate.json").string();
  const auto ra = run({"generate", "--config", config, "--out", a.string(), "--quiet"});
  const auto rb = run({"generate", "--config", config, "--out", b.string(), "--quiet", "--workers", "2"});
  REQUIRE(ra.code == cli::kExitOk);
  REQUIRE(rb.code == cli::kExitOk);
  CHECK(ra.out.empty());
  for (const char* f : {"record.csv", "report.json", "residuals_acceleration.csv", "residuals_displacement.csv",
                        "verification.json"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  CHECK(fs::exists(a / "timings.json"));

  const auto record = io::read_record_csv(a / "record.csv");
  CHECK(record.name() == "ETA-small");
  CHECK(record.size() == 257);
  CHECK(record.meta().at("generation_seed") == std::to_string(cli::kDefaultSeed));
  std::ostringstream rewritten;
  io::write_record_csv(rewritten, record);
  CHECK(rewritten.str() == slurp(a / "record.csv"));

  const auto report_json = io::read_json(a / "report.json");
  const auto report = io::generation_report_from_json(report_json);
  CHECK(report.final_objective < report.seed_objective);
  const auto residuals = io::read_spectrum_csv(a / "residuals_acceleration.csv", SpectrumKind::Acceleration);
  CHECK(residuals.periods.size() == 8);
  CHECK(residuals.times.size() == 4);

  const auto other = scratch("gen-seed");
  REQUIRE(run({"generate", "--config", config, "--out", other.string(), "--quiet", "--seed", "9"}).code == 0);
  CHECK(slurp(other / "record.csv") != slurp(a / "record.csv"));
}

TEST_CASE("spectra, verify and analyze on a generated record") {
  const auto dir = scratch("pipeline");
  REQUIRE(run({"generate", "--config", (kData / "small_generate.json").string(), "--out", dir.string(), "--quiet"})
              .code == 0);
  write_text(dir / "spectra.json", R"({"record": "record.csv", "periods": [0.2, 0.5, 1.0], "checkpoints": [2.5, 5.0]})");
  auto r = run({"spectra", "--config", (dir / "spectra.json").string(), "--out", (dir / "s").string()});
  CHECK(r.code == 0);
  const auto sa = io::read_spectrum_csv(dir / "s" / "spectrum_acceleration.csv", SpectrumKind::Acceleration);
  CHECK(sa.values.size() == 6);

  write_text(dir / "verify.json", R"({"etef": "record.csv",
    "target": {"profile": {"kind": "linear", "target_time": 2.5},
               "periods": {"min": 0.1, "max": 2.0, "count": 8}, "checkpoints": [1.25, 2.5, 3.75, 5.0]},
    "verification": {"misfit": 10.0, "ratio_band": 10.0, "ratio_min_fraction": 0.0}})");
  r = run({"verify", "--config", (dir / "verify.json").string(), "--out", (dir / "v").string()});
  CHECK(r.code == 0);
  CHECK(io::read_json(dir / "v" / "verification.json").at("passed") == true);

  write_text(dir / "analyze.json", R"({"etef": "record.csv",
    "model": {"kind": "shear-building", "uniform": {"count": 2, "first_period": 0.5, "hysteresis": "epp"}},
    "edp": "drift", "limits": [{"lambda": 1.0, "cap": 1.0, "label": "LS"}]})");
  r = run({"analyze", "--config", (dir / "analyze.json").string(), "--out", (dir / "a").string()});
  CHECK(r.code == 0);
  const auto curve = io::read_et_curve_csv(dir / "a" / "et_curve.csv");
  CHECK(curve.times.size() == 257);
  CHECK(io::read_json(dir / "a" / "et_summary.json").at("performance")[0].at("passed") == true);
}

TEST_CASE("compare: self-comparison fixture reports correlation 1") {
  const auto dir = scratch("self");
  write_text(dir / "ida.csv",
             "lambda,record_id,edp,collapsed\n"
             "0.5,a,0.01,0\n1,a,0.03,0\n1.5,a,0.05,0\n"
             "0.5,b,0.02,0\n1,b,0.04,0\n1.5,b,0.07,0\n"
             "0.5,c,0.015,0\n1,c,0.035,0\n1.5,c,0.06,0\n");
  write_text(dir / "et.csv", "t,lambda,edp\n0,0,0\n5,0.5,0.015\n10,1,0.035\n15,1.5,0.06\n");
  write_text(dir / "compare.json",
             R"({"et_curve": "et.csv", "ida": "ida.csv", "profile": {"kind": "linear", "target_time": 10}})");
  const auto r = run({"compare", "--config", (dir / "compare.json").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto report = io::comparison_report_from_json(io::read_json(dir / "out" / "comparison.json"));
  CHECK(report.correlation == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.mean_relative_error == doctest::Approx(0.0).scale(1e-12));
  CHECK(io::read_ida_csv(dir / "out" / "ida.csv").p50 == io::read_ida_csv(dir / "ida.csv").p50);
}

TEST_CASE("compare and ida reject an empty record suite") {
  const auto dir = scratch("empty");
  write_text(dir / "et.csv", "t,lambda,edp\n0,0,0\n20,2,0.1\n");
  write_text(dir / "compare.json", R"({"et_curve": "et.csv", "profile": {"kind": "linear", "target_time": 10},
    "model": {"kind": "sdof", "period": 0.5}, "lambdas": [0.5, 1.0], "records": []})");
  auto r = run({"compare", "--config", (dir / "compare.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("no records") != std::string::npos);

  write_text(dir / "ida.json", R"({"model": {"kind": "sdof", "period": 0.5}, "lambdas": [1.0],
    "synthetic": {"count": 0}})");
  r = run({"ida", "--config", (dir / "ida.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("no records") != std::string::npos);
}

TEST_CASE("ida on a small synthetic suite") {
  const auto dir = scratch("ida");
  write_text(dir / "ida.json", R"({"model": {"kind": "sdof", "period": 0.5, "hysteresis": "bilinear",
    "yield_strength": 5.0, "post_yield_ratio": 0.05}, "lambdas": {"start": 0.5, "stop": 1.5, "step": 0.5},
    "synthetic": {"count": 3, "duration": 5, "anchor_period": 0.5}})");
  const auto r = run({"ida", "--config", (dir / "ida.json").string(), "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto ida = io::read_ida_csv(dir / "out" / "ida.csv");
  CHECK(ida.record_ids.size() == 3);
  CHECK(ida.lambdas.size() == 3);
}

TEST_CASE("worker count falls back to ETFORGE_WORKERS") {
  const auto dir = scratch("workers");
  ::setenv("ETFORGE_WORKERS", "zero", 1);
  auto r = run({"generate", "--config", (kData / "small_generate.json").string(), "--out", dir.string()});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("ETFORGE_WORKERS") != std::string::npos);
  ::setenv("ETFORGE_WORKERS", "2", 1);
  r = run({"generate", "--config", (kData / "small_generate.json").string(), "--out", dir.string(), "--quiet"});
  CHECK(r.code == 0);
  ::unsetenv("ETFORGE_WORKERS");
  CHECK(run({"generate", "--config", "x.json", "--workers", "0"}).code == cli::kExitInput);
}
