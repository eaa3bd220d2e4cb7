#include "etforge/record.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace etforge {

AccelerationRecord::AccelerationRecord(double dt, std::vector<double> samples, std::string name,
                                       std::map<std::string, std::string> meta)
    : dt_(dt), samples_(std::move(samples)), name_(std::move(name)), meta_(std::move(meta)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw InputError("acceleration record: dt must be positive and finite");
  }
  if (samples_.size() < 2) {
    throw InputError("acceleration record: at least 2 samples required, got " +
                     std::to_string(samples_.size()));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw NumericalError("acceleration record: non-finite sample", i);
    }
  }
}

AccelerationRecord AccelerationRecord::scaled(double factor) const {
  std::vector<double> out(samples_);
  for (double& a : out) a *= factor;
  return AccelerationRecord(dt_, std::move(out), name_, meta_);
}

AccelerationRecord AccelerationRecord::with_samples(std::vector<double> samples) const {
  return AccelerationRecord(dt_, std::move(samples), name_, meta_);
}

AccelerationRecord AccelerationRecord::with_meta(std::string key, std::string value) const {
  auto meta = meta_;
  meta[std::move(key)] = std::move(value);
  return AccelerationRecord(dt_, samples_, name_, std::move(meta));
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& values, double dt) {
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * dt * (values[i - 1] + values[i]);
  }
  return out;
}

std::vector<double> compute_cav(const AccelerationRecord& record) {
  std::vector<double> magnitude(record.size());
  std::transform(record.samples().begin(), record.samples().end(), magnitude.begin(),
                 [](double a) { return std::abs(a); });
  return cumulative_trapezoid(magnitude, record.dt());
}

PeakMetrics peak_metrics(const AccelerationRecord& record) {
  const auto& a = record.samples();
  const auto velocity = cumulative_trapezoid(a, record.dt());
  const auto displacement = cumulative_trapezoid(velocity, record.dt());
  auto peak = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  return {peak(a), peak(velocity), peak(displacement)};
}

}  // namespace etforge
