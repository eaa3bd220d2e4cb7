// Endurance time response analysis: envelopes, a shear-building model,
// intensity/time mapping and an incremental dynamic analysis reference.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "etforge/record.hpp"
#include "etforge/sdof.hpp"
#include "etforge/target.hpp"

namespace etforge {

/// Envelope Omega(t) = max |f(tau)| over [0, t] of one response quantity.
struct ETCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::string edp;
  std::optional<double> collapse_time;

  bool collapsed() const noexcept { return collapse_time.has_value(); }
  /// Linear interpolation of the envelope at t; t must lie within the curve.
  double at(double t) const;
};

ETCurve envelope(std::span<const double> history, double dt, std::string edp = {});

enum class EDP { DriftRatio, RoofDisplacement, BaseShear, StoryDuctility };

EDP parse_edp(std::string_view name);
std::string_view to_string(EDP edp);

struct Story {
  double mass = 1.0;
  double stiffness = 1.0;  // per unit mass of the story, 1/s^2 when mass = 1
  double height = 3.0;     // m
  Hysteresis hysteresis = Hysteresis::Linear;
  double yield_drift = 0.01;  // yield drift ratio, nonlinear kinds
  double post_yield_ratio = 0.0;

  BilinearSpring spring() const;
  double yield_deformation() const { return yield_drift * height; }
};

/// Shear building with Rayleigh damping anchored at the first period and a
/// third of it. Story 0 sits on the ground.
struct ShearBuildingModel {
  std::vector<Story> stories;
  double damping = kDefaultDamping;

  /// n identical stories with stiffness scaled so the first period equals `first_period`.
  static ShearBuildingModel uniform(std::size_t n, double first_period, Hysteresis hysteresis,
                                    double yield_drift = 0.01, double post_yield_ratio = 0.0,
                                    double damping = kDefaultDamping, double height = 3.0);

  void validate() const;
  /// Modal periods, longest first.
  std::vector<double> periods() const;
};

/// Histories of every supported EDP, sampled at the record samples up to the
/// end of the run (or the collapse sample).
struct StructuralResponse {
  double dt = 0.0;
  std::vector<double> max_drift_ratio;
  std::vector<double> roof_displacement;
  std::vector<double> base_shear;  // per unit total mass, m/s^2
  std::vector<double> max_ductility;
  std::optional<double> collapse_time;

  const std::vector<double>& history(EDP edp) const;
};

struct AnalysisOptions {
  double collapse_drift = 0.10;  // drift ratio treated as collapse
  double sdof_height = 3.0;      // height used for SDOF drift ratios
};

using StructuralModel = std::variant<SDOFModel, ShearBuildingModel>;

StructuralResponse integrate_shear_building(const ShearBuildingModel& model,
                                            const AccelerationRecord& record,
                                            const AnalysisOptions& options = {});
StructuralResponse structural_response(const StructuralModel& model,
                                       const AccelerationRecord& record,
                                       const AnalysisOptions& options = {});

/// Envelope of the selected EDP under an ETEF, truncated and flagged at collapse.
ETCurve run_et_analysis(const StructuralModel& model, const AccelerationRecord& etef, EDP edp,
                        const AnalysisOptions& options = {});

struct IDACurve {
  std::vector<double> lambdas;
  std::vector<std::string> record_ids;
  std::vector<std::vector<double>> edp;      // [record][lambda]
  std::vector<std::vector<bool>> collapsed;  // [record][lambda]
  std::vector<double> p16;
  std::vector<double> p50;
  std::vector<double> p84;

  void summarise();
};

/// Empirical fractile with linear interpolation between order statistics.
double fractile(std::vector<double> values, double q);

IDACurve run_ida(const StructuralModel& model, std::span<const AccelerationRecord> records,
                 std::span<const double> lambdas, EDP edp, const AnalysisOptions& options = {},
                 int workers = 1);

struct ComparisonReport {
  std::vector<double> lambdas;
  std::vector<double> times;
  std::vector<double> et;
  std::vector<double> median;
  double correlation = 0.0;
  double mean_relative_error = 0.0;  // mean |ET - median| / median
  double mean_deviation_p16 = 0.0;   // mean (ET - p16) / p16
  double mean_deviation_p50 = 0.0;
  double mean_deviation_p84 = 0.0;
};

double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Resamples the ET curve onto the IDA scale factors through t = g^-1(lambda)
/// and measures agreement with the IDA fractiles.
ComparisonReport compare_et_vs_ida(const ETCurve& et, const IntensifyingProfile& profile,
                                   const IDACurve& ida);

struct PerformanceLimit {
  double lambda = 1.0;
  double cap = 0.0;
  std::string label;
};

struct PerformanceCheck {
  PerformanceLimit limit;
  double time = 0.0;    // equivalent ET time of the hazard level
  double demand = 0.0;  // Omega at that time
  bool passed = false;
};

std::vector<PerformanceCheck> check_performance(const ETCurve& et,
                                                const IntensifyingProfile& profile,
                                                std::span<const PerformanceLimit> limits);

struct SyntheticSuite {
  std::size_t count = 5;
  std::uint64_t rng_seed = 2024;
  double duration = 20.0;
  double dt = 0.02;
  double damping = kDefaultDamping;
  /// When set, each record is scaled to the target at this period (an
  /// S_a(T1) intensity measure); otherwise to a mean ratio of 1 over the grid.
  std::optional<double> anchor_period;
};

/// Band-limited noise records with cosine onset and decay, windowed to the
/// suite duration and scaled to the base target.
std::vector<AccelerationRecord> synthetic_records(const BaseTargetSpectrum& base,
                                                  std::span<const double> periods,
                                                  const SyntheticSuite& suite);

}  // namespace etforge
