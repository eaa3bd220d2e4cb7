// Single-degree-of-freedom oscillators under base acceleration and running
// response spectra. Everything is per unit mass: forces are pseudo-accelerations.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "etforge/record.hpp"

namespace etforge {

inline constexpr double kDefaultDamping = 0.05;

enum class Hysteresis { Linear, ElasticPerfectlyPlastic, Bilinear };

Hysteresis parse_hysteresis(std::string_view name);
std::string_view to_string(Hysteresis h);

/// Rate-independent spring with kinematic bilinear hardening, split into a
/// linear branch of stiffness r*k and an elastic-perfectly-plastic branch of
/// stiffness (1-r)*k capped at (1-r)*yield_force.
struct BilinearSpring {
  double stiffness = 1.0;
  double yield_force = 0.0;  // <= 0 means never yields
  double post_yield_ratio = 0.0;

  struct State {
    double deformation = 0.0;
    double hysteretic_force = 0.0;  // force carried by the plastic branch
    double dissipated = 0.0;        // cumulative plastic work
  };

  bool is_linear() const noexcept { return !(yield_force > 0.0); }
  double force(const State& s) const noexcept {
    return is_linear() ? stiffness * s.deformation
                       : post_yield_ratio * stiffness * s.deformation + s.hysteretic_force;
  }
  /// Return-mapped state after moving from `committed` to `deformation`.
  State trial(const State& committed, double deformation) const noexcept;
  /// Tangent stiffness of the branch reached by trial().
  double tangent(const State& committed, const State& trial_state) const noexcept;
};

struct SDOFModel {
  double period = 1.0;
  double damping = kDefaultDamping;
  Hysteresis hysteresis = Hysteresis::Linear;
  double yield_strength = 0.0;    // eta, m/s^2
  double post_yield_ratio = 0.0;  // r, bilinear only

  static SDOFModel linear(double period, double damping = kDefaultDamping);
  static SDOFModel elastic_perfectly_plastic(double period, double yield_strength,
                                             double damping = kDefaultDamping);
  static SDOFModel bilinear(double period, double yield_strength, double post_yield_ratio,
                            double damping = kDefaultDamping);

  void validate() const;
  double omega() const;
  BilinearSpring spring() const;
  /// Displacement at first yield, eta / omega^2 (infinite for linear).
  double yield_displacement() const;
};

struct SDOFResponse {
  double dt = 0.0;
  std::vector<double> displacement;           // m
  std::vector<double> velocity;               // m/s
  std::vector<double> relative_acceleration;  // m/s^2
  std::vector<double> absolute_acceleration;  // m/s^2
  std::vector<double> restoring_force;        // pseudo-acceleration, m/s^2
  std::vector<double> hysteretic_energy;      // m^2/s^2, cumulative
};

/// Number of Newmark sub-steps per record interval so the effective step is <= period / 20.
int substeps_for(double dt, double period);

/// Newmark average-acceleration integration from rest. Histories are reported
/// at the record samples; sub-steps use linearly interpolated ground motion.
SDOFResponse integrate_sdof(const SDOFModel& model, const AccelerationRecord& record);

/// Final cumulative plastic work per unit mass; 0 for linear responses.
double hysteretic_energy(const SDOFResponse& response);

enum class SpectrumKind { Acceleration, Displacement };

/// Running-maximum spectrum on a period x checkpoint grid, stored period-major.
struct RunningSpectrum {
  SpectrumKind kind = SpectrumKind::Acceleration;
  std::vector<double> periods;
  std::vector<double> times;
  std::vector<double> values;

  RunningSpectrum() = default;
  RunningSpectrum(SpectrumKind k, std::vector<double> p, std::vector<double> t)
      : kind(k), periods(std::move(p)), times(std::move(t)), values(periods.size() * times.size()) {}

  double& at(std::size_t period_index, std::size_t time_index) {
    return values[period_index * times.size() + time_index];
  }
  double at(std::size_t period_index, std::size_t time_index) const {
    return values[period_index * times.size() + time_index];
  }
  /// Values at one checkpoint across all periods.
  std::vector<double> column(std::size_t time_index) const;
};

struct SpectrumPair {
  RunningSpectrum acceleration;
  RunningSpectrum displacement;
};

/// Sample index of the last record sample at or before each checkpoint.
/// Rejects checkpoints outside (0, duration] and non-increasing grids.
std::vector<std::size_t> checkpoint_samples(std::span<const double> checkpoints, double dt,
                                            std::size_t sample_count);

/// Linear Newmark oscillator specialised for spectra. One instance per period.
class LinearOscillator {
 public:
  struct State {
    double u = 0.0;
    double v = 0.0;
    double a = 0.0;
    double max_acceleration = 0.0;  // running max of |a + a_g|
    double max_displacement = 0.0;  // running max of |u|
  };

  LinearOscillator(double period, double damping, double dt);
  /// Advance one record interval with ground motion varying linearly from ag0 to ag1.
  void advance(State& s, double ag0, double ag1) const noexcept;
  int substeps() const noexcept { return substeps_; }

 private:
  int substeps_;
  double h_;
  double omega2_;
  double c_;
  double inv_keff_;
};

/// Running acceleration and displacement spectra (linear oscillators). Maxima
/// run over every integration point up to each checkpoint. `workers` > 1
/// evaluates periods concurrently.
SpectrumPair response_spectra(const AccelerationRecord& record, std::span<const double> periods,
                              std::span<const double> checkpoints,
                              double damping = kDefaultDamping, int workers = 1);

}  // namespace etforge
