#include "etforge/target.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace etforge {

BaseTargetSpectrum BaseTargetSpectrum::parametric(double plateau, double corner_short,
                                                  double corner_long, double decay_exponent) {
  if (!(plateau > 0.0)) throw InputError("target spectrum plateau must be positive");
  if (!(corner_short >= 0.0) || !(corner_long >= corner_short)) {
    throw InputError("target spectrum corner periods must satisfy 0 <= T_b <= T_c");
  }
  if (!(decay_exponent > 0.0)) throw InputError("target spectrum decay exponent must be positive");
  BaseTargetSpectrum s;
  s.kind_ = Kind::Parametric;
  s.plateau_ = plateau;
  s.corner_short_ = corner_short;
  s.corner_long_ = corner_long;
  s.decay_ = decay_exponent;
  return s;
}

BaseTargetSpectrum BaseTargetSpectrum::tabulated(std::vector<double> periods,
                                                 std::vector<double> values) {
  if (periods.size() != values.size() || periods.size() < 2) {
    throw InputError("tabulated spectrum needs at least two (period, value) pairs");
  }
  for (std::size_t i = 0; i < periods.size(); ++i) {
    if (!(periods[i] > 0.0) || (i > 0 && !(periods[i] > periods[i - 1]))) {
      throw InputError("tabulated spectrum periods must be positive and strictly increasing");
    }
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw InputError("tabulated spectrum values must be positive");
    }
  }
  BaseTargetSpectrum s;
  s.kind_ = Kind::Tabulated;
  s.table_periods_ = std::move(periods);
  s.table_values_ = std::move(values);
  s.plateau_ = *std::max_element(s.table_values_.begin(), s.table_values_.end());
  return s;
}

double BaseTargetSpectrum::acceleration(double period) const {
  if (!(period > 0.0)) throw InputError("spectrum period must be positive");
  if (kind_ == Kind::Tabulated) {
    const auto& p = table_periods_;
    if (period < p.front() * (1.0 - 1e-12) || period > p.back() * (1.0 + 1e-12)) {
      throw InputError("period " + std::to_string(period) + " s outside tabulated range [" +
                       std::to_string(p.front()) + ", " + std::to_string(p.back()) + "]");
    }
    const auto it = std::upper_bound(p.begin(), p.end(), period);
    if (it == p.end()) return table_values_.back();
    if (it == p.begin()) return table_values_.front();
    const std::size_t i = static_cast<std::size_t>(it - p.begin());
    const double w = (period - p[i - 1]) / (p[i] - p[i - 1]);
    return table_values_[i - 1] + w * (table_values_[i] - table_values_[i - 1]);
  }
  if (period < corner_short_) return plateau_ * (0.4 + 0.6 * period / corner_short_);
  if (period <= corner_long_) return plateau_;
  return plateau_ * std::pow(corner_long_ / period, decay_);
}

double BaseTargetSpectrum::displacement(double period) const {
  const double f = period / (2.0 * std::numbers::pi);
  return acceleration(period) * f * f;
}

IntensifyingProfile IntensifyingProfile::linear(double target_time) {
  if (!(target_time > 0.0) || !std::isfinite(target_time)) {
    throw InputError("target time must be positive");
  }
  IntensifyingProfile p;
  p.kind_ = Kind::Linear;
  p.target_time_ = target_time;
  return p;
}

IntensifyingProfile IntensifyingProfile::exponential(double target_time, double b, double gamma,
                                                     double alpha) {
  if (!(target_time > 0.0)) throw InputError("target time must be positive");
  if (!(b > 0.0) || !(gamma > 0.0) || !(alpha > 0.0)) {
    throw InputError("exponential profile constants b, gamma, alpha must be positive");
  }
  IntensifyingProfile p;
  p.kind_ = Kind::Exponential;
  p.target_time_ = target_time;
  p.b_ = b;
  p.gamma_ = gamma;
  p.alpha_ = alpha;
  const double at_target = p.value(target_time);
  if (std::abs(at_target - 1.0) > 1e-9) {
    throw InputError("exponential profile gives g(t_target) = " + std::to_string(at_target) +
                     ", expected 1");
  }
  return p;
}

double IntensifyingProfile::value(double t) const {
  if (!(t >= 0.0)) throw InputError("profile time must be non-negative");
  if (kind_ == Kind::Linear) return t / target_time_;
  return b_ * std::tanh(gamma_ * t) * std::exp(alpha_ * t);
}

std::string_view to_string(IntensifyingProfile::Kind kind) {
  return kind == IntensifyingProfile::Kind::Linear ? "linear" : "exponential";
}

double profile_value(const IntensifyingProfile& profile, double t) { return profile.value(t); }

IntensifyingProfile calibrate_exponential(double target_time, double gamma, double alpha) {
  if (!(gamma > 0.0) || !(alpha > 0.0)) {
    throw InputError("exponential profile shape parameters gamma, alpha must be positive");
  }
  if (!(target_time > 0.0)) throw InputError("target time must be positive");
  const double th = std::tanh(gamma * target_time);
  if (gamma * target_time < 1e-8 || th <= 0.0) {
    throw InputError("degenerate exponential profile: gamma * t_target is ~0");
  }
  const double b = 1.0 / (th * std::exp(alpha * target_time));
  return IntensifyingProfile::exponential(target_time, b, gamma, alpha);
}

double time_to_intensity(const IntensifyingProfile& profile, double t) { return profile.value(t); }

double intensity_to_time(const IntensifyingProfile& profile, double lambda, double duration) {
  const double top = profile.value(duration);
  if (!(lambda >= 0.0) || lambda > top * (1.0 + 1e-12)) {
    throw InputError("scale factor " + std::to_string(lambda) + " outside achievable range [0, " +
                     std::to_string(top) + "]");
  }
  if (lambda == 0.0) return 0.0;
  if (profile.kind() == IntensifyingProfile::Kind::Linear) return lambda * profile.target_time();
  if (lambda >= top) return duration;
  auto f = [&](double t) { return profile.value(t) - lambda; };
  boost::uintmax_t max_iter = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      f, 0.0, duration, -lambda, top - lambda, boost::math::tools::eps_tolerance<double>(), max_iter);
  return 0.5 * (lo + hi);
}

GridSpacing parse_grid_spacing(std::string_view name) {
  if (name == "linear") return GridSpacing::Linear;
  if (name == "log") return GridSpacing::Log;
  throw InputError("unknown grid spacing '" + std::string(name) + "' (expected linear or log)");
}

std::vector<double> make_period_grid(double t_min, double t_max, std::size_t count,
                                     GridSpacing spacing) {
  if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
    throw InputError("period grid needs 0 < T_min < T_max and at least 2 points");
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = spacing == GridSpacing::Log ? t_min * std::pow(t_max / t_min, w)
                                         : t_min + w * (t_max - t_min);
  }
  out.front() = t_min;
  out.back() = t_max;
  return out;
}

std::vector<double> uniform_checkpoints(double duration, std::size_t count) {
  if (!(duration > 0.0) || count == 0) throw InputError("checkpoint grid needs count >= 1");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = duration * static_cast<double>(k + 1) / static_cast<double>(count);
  }
  return out;
}

void TargetModel::validate() const {
  if (periods.empty()) throw InputError("target model: period grid is empty");
  if (checkpoints.empty()) throw InputError("target model: checkpoint grid is empty");
  for (std::size_t j = 0; j < periods.size(); ++j) {
    if (!(periods[j] > 0.0) || (j > 0 && !(periods[j] > periods[j - 1]))) {
      throw InputError("target model: periods must be positive and increasing");
    }
    if (!(base.acceleration(periods[j]) > 0.0)) {
      throw InputError("target model: base spectrum must be positive over the period grid");
    }
  }
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (!(checkpoints[k] > 0.0) || (k > 0 && !(checkpoints[k] > checkpoints[k - 1]))) {
      throw InputError("target model: checkpoints must be positive and increasing");
    }
  }
}

SpectrumPair target_surface(const TargetModel& model) {
  model.validate();
  SpectrumPair out{RunningSpectrum(SpectrumKind::Acceleration, model.periods, model.checkpoints),
                   RunningSpectrum(SpectrumKind::Displacement, model.periods, model.checkpoints)};
  for (std::size_t k = 0; k < model.checkpoints.size(); ++k) {
    const double g = model.profile.value(model.checkpoints[k]);
    for (std::size_t j = 0; j < model.periods.size(); ++j) {
      out.acceleration.at(j, k) = g * model.base.acceleration(model.periods[j]);
      out.displacement.at(j, k) = g * model.base.displacement(model.periods[j]);
    }
  }
  return out;
}

}  // namespace etforge
