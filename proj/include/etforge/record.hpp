// Uniformly sampled ground-acceleration records and scalar motion metrics.
#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace etforge {

/// Raised for malformed user input (bad config values, short signals, bad files).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation meets a non-finite value. `index` names the
/// offending sample, variable or step.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t index)
      : std::runtime_error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Ground acceleration a_g(t) in m/s^2 sampled every `dt` seconds, starting at t = 0.
class AccelerationRecord {
 public:
  AccelerationRecord(double dt, std::vector<double> samples, std::string name = {},
                     std::map<std::string, std::string> meta = {});

  double dt() const noexcept { return dt_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration() const noexcept { return dt_ * static_cast<double>(samples_.size() - 1); }
  double time(std::size_t i) const noexcept { return dt_ * static_cast<double>(i); }
  const std::string& name() const noexcept { return name_; }
  const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

  AccelerationRecord scaled(double factor) const;
  AccelerationRecord with_samples(std::vector<double> samples) const;
  AccelerationRecord with_meta(std::string key, std::string value) const;

 private:
  double dt_;
  std::vector<double> samples_;
  std::string name_;
  std::map<std::string, std::string> meta_;
};

struct PeakMetrics {
  double pga = 0.0;  // m/s^2
  double pgv = 0.0;  // m/s
  double pgd = 0.0;  // m
};

/// Running cumulative absolute velocity, trapezoidal on |a|. Same length as the record.
std::vector<double> compute_cav(const AccelerationRecord& record);

/// Peak ground acceleration, velocity and displacement; velocity and
/// displacement are trapezoidal integrals from rest.
PeakMetrics peak_metrics(const AccelerationRecord& record);

/// Cumulative trapezoidal integral of `values` sampled at `dt`, starting at 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& values, double dt);

}  // namespace etforge
