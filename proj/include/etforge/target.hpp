// Base target spectra, intensifying profiles and the time-varying target
// surfaces obtained by multiplying the two.
#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "etforge/sdof.hpp"

namespace etforge {

/// Target pseudo-acceleration spectrum S_aT(T) in m/s^2.
class BaseTargetSpectrum {
 public:
  enum class Kind { Parametric, Tabulated };

  /// Ramp from 0.4*plateau at T = 0 to plateau at corner_short, flat to
  /// corner_long, then plateau * (corner_long / T)^decay_exponent.
  static BaseTargetSpectrum parametric(double plateau, double corner_short, double corner_long,
                                       double decay_exponent = 1.0);
  /// Piecewise-linear interpolation between (period, value) pairs.
  static BaseTargetSpectrum tabulated(std::vector<double> periods, std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double acceleration(double period) const;
  /// Displacement target S_uT(T) = S_aT(T) * (T / 2 pi)^2.
  double displacement(double period) const;

  double plateau() const noexcept { return plateau_; }
  double corner_short() const noexcept { return corner_short_; }
  double corner_long() const noexcept { return corner_long_; }
  double decay_exponent() const noexcept { return decay_; }
  const std::vector<double>& table_periods() const noexcept { return table_periods_; }
  const std::vector<double>& table_values() const noexcept { return table_values_; }

 private:
  BaseTargetSpectrum() = default;

  Kind kind_ = Kind::Parametric;
  double plateau_ = 0.0;
  double corner_short_ = 0.0;
  double corner_long_ = 0.0;
  double decay_ = 1.0;
  std::vector<double> table_periods_;
  std::vector<double> table_values_;
};

/// Intensifying profile g(t): linear t / t_target or exponential
/// b * tanh(gamma * t) * exp(alpha * t). Every constructed profile satisfies
/// g(t_target) = 1.
class IntensifyingProfile {
 public:
  enum class Kind { Linear, Exponential };

  static IntensifyingProfile linear(double target_time);
  /// Explicit exponential constants; rejected unless g(target_time) = 1 within 1e-9.
  static IntensifyingProfile exponential(double target_time, double b, double gamma, double alpha);

  Kind kind() const noexcept { return kind_; }
  double target_time() const noexcept { return target_time_; }
  double b() const noexcept { return b_; }
  double gamma() const noexcept { return gamma_; }
  double alpha() const noexcept { return alpha_; }

  double value(double t) const;

 private:
  IntensifyingProfile() = default;

  Kind kind_ = Kind::Linear;
  double target_time_ = 10.0;
  double b_ = 0.0;
  double gamma_ = 0.0;
  double alpha_ = 0.0;
};

std::string_view to_string(IntensifyingProfile::Kind kind);

double profile_value(const IntensifyingProfile& profile, double t);

/// Exponential profile with b solved so that g(target_time) = 1.
IntensifyingProfile calibrate_exponential(double target_time, double gamma, double alpha);

/// Scale factor represented by analysis time t: lambda = g(t).
double time_to_intensity(const IntensifyingProfile& profile, double t);
/// Inverse of time_to_intensity on [0, duration]; closed form for linear
/// profiles, bracketed root finding for exponential ones.
double intensity_to_time(const IntensifyingProfile& profile, double lambda, double duration);

enum class GridSpacing { Linear, Log };

GridSpacing parse_grid_spacing(std::string_view name);
std::vector<double> make_period_grid(double t_min, double t_max, std::size_t count,
                                     GridSpacing spacing);
/// count uniformly spaced times k * duration / count, k = 1..count.
std::vector<double> uniform_checkpoints(double duration, std::size_t count);

/// Defaults are the desk-scale target: a 7.5 m/s^2 plateau between 0.15 s
/// and 0.6 s with a linear profile reaching 1 at 10 s.
struct TargetModel {
  BaseTargetSpectrum base = BaseTargetSpectrum::parametric(7.5, 0.15, 0.6);
  IntensifyingProfile profile = IntensifyingProfile::linear(10.0);
  std::vector<double> periods;
  std::vector<double> checkpoints;

  void validate() const;
};

/// Matrices g(t_k) * S_aT(T_j) and g(t_k) * S_uT(T_j).
SpectrumPair target_surface(const TargetModel& model);

}  // namespace etforge
