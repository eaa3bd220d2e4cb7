// File formats: record / spectrum / ET-curve / IDA CSV, and JSON configs and reports.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "etforge/analysis.hpp"
#include "etforge/generator.hpp"
#include "etforge/record.hpp"
#include "etforge/sdof.hpp"
#include "etforge/target.hpp"
#include "json.hpp"

namespace etforge::io {

using nlohmann::json;

/// Shortest decimal text that reads back to the same double.
std::string format_exact(double value);
/// Ten significant digits, used for derived tables.
std::string format_fixed(double value);

// Record CSV: "# name=<id> dt=<s> units=m/s2 [key=value ...]" then one value per line.
void write_record_csv(std::ostream& out, const AccelerationRecord& record);
void write_record_csv(const std::filesystem::path& path, const AccelerationRecord& record);
AccelerationRecord read_record_csv(std::istream& in, const std::string& source = "<stream>");
AccelerationRecord read_record_csv(const std::filesystem::path& path);

// Spectrum CSV: "period\t<t1>\t<t2>..." then one row per period.
void write_spectrum_csv(std::ostream& out, const RunningSpectrum& spectrum);
void write_spectrum_csv(const std::filesystem::path& path, const RunningSpectrum& spectrum);
RunningSpectrum read_spectrum_csv(std::istream& in, SpectrumKind kind);
RunningSpectrum read_spectrum_csv(const std::filesystem::path& path, SpectrumKind kind);

// Tabulated base spectrum: "period,value" rows (an optional header line is skipped).
BaseTargetSpectrum read_tabulated_spectrum(const std::filesystem::path& path);

// ET curve CSV: "t,lambda,edp".
void write_et_curve_csv(std::ostream& out, const ETCurve& curve, const IntensifyingProfile& profile);
void write_et_curve_csv(const std::filesystem::path& path, const ETCurve& curve,
                        const IntensifyingProfile& profile);
ETCurve read_et_curve_csv(std::istream& in);
ETCurve read_et_curve_csv(const std::filesystem::path& path);

// IDA CSV: "lambda,record_id,edp,collapsed".
void write_ida_csv(std::ostream& out, const IDACurve& ida);
void write_ida_csv(const std::filesystem::path& path, const IDACurve& ida);
IDACurve read_ida_csv(std::istream& in);
IDACurve read_ida_csv(const std::filesystem::path& path);

json to_json(const GenerationReport& report);
/// Scalar and history fields only; residual matrices live in their own CSVs.
GenerationReport generation_report_from_json(const json& j);
json to_json(const VerificationReport& report);
json to_json(const ComparisonReport& report);
ComparisonReport comparison_report_from_json(const json& j);
json to_json(const ETCurve& curve, std::span<const PerformanceCheck> checks);
json to_json(const IDACurve& ida);

/// Reads a JSON file; parse errors are rethrown as InputError naming the path and line.
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// Config readers. `base_dir` resolves relative file paths inside the config.
/// Field problems are reported as InputError naming the JSON path.
BaseTargetSpectrum parse_spectrum(const json& j, const std::filesystem::path& base_dir);
IntensifyingProfile parse_profile(const json& j);
std::vector<double> parse_periods(const json& j);
std::vector<double> parse_checkpoints(const json& j, double duration);
TargetModel parse_target(const json& j, double duration, const std::filesystem::path& base_dir);
GenerationProblem parse_problem(const json& j, const std::filesystem::path& base_dir);
VerificationTolerance parse_tolerance(const json& j);
StructuralModel parse_model(const json& j);
std::vector<double> parse_lambdas(const json& j);
std::vector<PerformanceLimit> parse_limits(const json& j);

}  // namespace etforge::io
