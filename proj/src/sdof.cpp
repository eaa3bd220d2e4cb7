#include "etforge/sdof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "etforge/parallel.hpp"

namespace etforge {

Hysteresis parse_hysteresis(std::string_view name) {
  if (name == "linear") return Hysteresis::Linear;
  if (name == "epp" || name == "elastic-perfectly-plastic") return Hysteresis::ElasticPerfectlyPlastic;
  if (name == "bilinear") return Hysteresis::Bilinear;
  throw InputError("unknown hysteresis '" + std::string(name) +
                   "' (expected linear, epp or bilinear)");
}

std::string_view to_string(Hysteresis h) {
  switch (h) {
    case Hysteresis::Linear: return "linear";
    case Hysteresis::ElasticPerfectlyPlastic: return "epp";
    case Hysteresis::Bilinear: return "bilinear";
  }
  return "linear";
}

BilinearSpring::State BilinearSpring::trial(const State& committed,
                                            double deformation) const noexcept {
  State s = committed;
  s.deformation = deformation;
  if (is_linear()) return s;
  const double elastic = (1.0 - post_yield_ratio) * stiffness;
  const double cap = (1.0 - post_yield_ratio) * yield_force;
  const double increment = deformation - committed.deformation;
  const double unclipped = committed.hysteretic_force + elastic * increment;
  const double z = std::clamp(unclipped, -cap, cap);
  s.hysteretic_force = z;
  // The plastic increment (unclipped - z) / elastic always has the sign of z.
  if (z != unclipped) s.dissipated = committed.dissipated + z * (unclipped - z) / elastic;
  return s;
}

double BilinearSpring::tangent(const State& committed, const State& trial_state) const noexcept {
  if (is_linear()) return stiffness;
  const double elastic = (1.0 - post_yield_ratio) * stiffness;
  const double cap = (1.0 - post_yield_ratio) * yield_force;
  const double unclipped =
      committed.hysteretic_force + elastic * (trial_state.deformation - committed.deformation);
  return std::abs(unclipped) > cap ? post_yield_ratio * stiffness : stiffness;
}

SDOFModel SDOFModel::linear(double period, double damping) {
  SDOFModel m;
  m.period = period;
  m.damping = damping;
  m.validate();
  return m;
}

SDOFModel SDOFModel::elastic_perfectly_plastic(double period, double yield_strength,
                                               double damping) {
  SDOFModel m;
  m.period = period;
  m.damping = damping;
  m.hysteresis = Hysteresis::ElasticPerfectlyPlastic;
  m.yield_strength = yield_strength;
  m.validate();
  return m;
}

SDOFModel SDOFModel::bilinear(double period, double yield_strength, double post_yield_ratio,
                              double damping) {
  SDOFModel m;
  m.period = period;
  m.damping = damping;
  m.hysteresis = Hysteresis::Bilinear;
  m.yield_strength = yield_strength;
  m.post_yield_ratio = post_yield_ratio;
  m.validate();
  return m;
}

void SDOFModel::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) throw InputError("SDOF period must be positive");
  if (!(damping >= 0.0 && damping < 1.0)) throw InputError("SDOF damping ratio must be in [0, 1)");
  if (hysteresis != Hysteresis::Linear && !(yield_strength > 0.0 && std::isfinite(yield_strength))) {
    throw InputError("SDOF yield strength must be positive for nonlinear hysteresis");
  }
  if (hysteresis == Hysteresis::Bilinear && !(post_yield_ratio >= 0.0 && post_yield_ratio < 1.0)) {
    throw InputError("SDOF post-yield stiffness ratio must be in [0, 1)");
  }
}

double SDOFModel::omega() const { return 2.0 * std::numbers::pi / period; }

BilinearSpring SDOFModel::spring() const {
  const double w = omega();
  BilinearSpring s;
  s.stiffness = w * w;
  switch (hysteresis) {
    case Hysteresis::Linear:
      s.yield_force = 0.0;
      break;
    case Hysteresis::ElasticPerfectlyPlastic:
      s.yield_force = yield_strength;
      s.post_yield_ratio = 0.0;
      break;
    case Hysteresis::Bilinear:
      s.yield_force = yield_strength;
      s.post_yield_ratio = post_yield_ratio;
      break;
  }
  return s;
}

double SDOFModel::yield_displacement() const {
  if (hysteresis == Hysteresis::Linear) return std::numeric_limits<double>::infinity();
  const double w = omega();
  return yield_strength / (w * w);
}

int substeps_for(double dt, double period) {
  const double limit = period / 20.0;
  return std::max(1, static_cast<int>(std::ceil(dt / limit - 1e-9)));
}

namespace {

// One Newmark average-acceleration step of m*a + c*v + f(u) = -ag (m = 1).
// The spring law is piecewise linear and monotone, so the step is solved
// exactly by trying the elastic branch first and then the matching yield branch.
struct StepState {
  double u = 0.0;
  double v = 0.0;
  double a = 0.0;
  BilinearSpring::State spring;
};

StepState newmark_step(const StepState& n, const BilinearSpring& spring, double c, double h,
                       double ag1) {
  const double a0 = 4.0 / (h * h);
  const double k0 = a0 + 2.0 * c / h;
  const double rhs = -ag1 + n.a + (4.0 / h) * n.v + c * n.v;
  double delta = 0.0;
  if (spring.is_linear()) {
    delta = (rhs - spring.stiffness * n.u) / (k0 + spring.stiffness);
  } else {
    const double rk = spring.post_yield_ratio * spring.stiffness;
    const double elastic = (1.0 - spring.post_yield_ratio) * spring.stiffness;
    const double cap = (1.0 - spring.post_yield_ratio) * spring.yield_force;
    const double z0 = n.spring.hysteretic_force;
    delta = (rhs - rk * n.u - z0) / (k0 + rk + elastic);
    const double z_trial = z0 + elastic * delta;
    if (std::abs(z_trial) > cap) {
      const double z = std::copysign(cap, z_trial);
      delta = (rhs - rk * n.u - z) / (k0 + rk);
    }
  }
  StepState out;
  out.u = n.u + delta;
  out.v = (2.0 / h) * delta - n.v;
  out.a = a0 * delta - (4.0 / h) * n.v - n.a;
  out.spring = spring.trial(n.spring, out.u);
  return out;
}

}  // namespace

SDOFResponse integrate_sdof(const SDOFModel& model, const AccelerationRecord& record) {
  model.validate();
  const auto& ag = record.samples();
  const std::size_t n = ag.size();
  const int sub = substeps_for(record.dt(), model.period);
  const double h = record.dt() / sub;
  const double c = 2.0 * model.damping * model.omega();
  const BilinearSpring spring = model.spring();

  SDOFResponse r;
  r.dt = record.dt();
  r.displacement.assign(n, 0.0);
  r.velocity.assign(n, 0.0);
  r.relative_acceleration.assign(n, 0.0);
  r.absolute_acceleration.assign(n, 0.0);
  r.restoring_force.assign(n, 0.0);
  r.hysteretic_energy.assign(n, 0.0);

  StepState s;
  s.a = -ag[0];
  r.relative_acceleration[0] = s.a;
  for (std::size_t i = 1; i < n; ++i) {
    for (int j = 1; j <= sub; ++j) {
      const double w = static_cast<double>(j) / sub;
      s = newmark_step(s, spring, c, h, ag[i - 1] + w * (ag[i] - ag[i - 1]));
    }
    if (!std::isfinite(s.u) || !std::isfinite(s.a)) {
      throw NumericalError("SDOF integration diverged", i);
    }
    r.displacement[i] = s.u;
    r.velocity[i] = s.v;
    r.relative_acceleration[i] = s.a;
    r.absolute_acceleration[i] = s.a + ag[i];
    r.restoring_force[i] = spring.force(s.spring);
    r.hysteretic_energy[i] = s.spring.dissipated;
  }
  return r;
}

double hysteretic_energy(const SDOFResponse& response) {
  return response.hysteretic_energy.empty() ? 0.0 : response.hysteretic_energy.back();
}

std::vector<double> RunningSpectrum::column(std::size_t time_index) const {
  std::vector<double> out(periods.size());
  for (std::size_t j = 0; j < periods.size(); ++j) out[j] = at(j, time_index);
  return out;
}

std::vector<std::size_t> checkpoint_samples(std::span<const double> checkpoints, double dt,
                                            std::size_t sample_count) {
  if (checkpoints.empty()) throw InputError("checkpoint grid is empty");
  const double duration = dt * static_cast<double>(sample_count - 1);
  std::vector<std::size_t> out;
  out.reserve(checkpoints.size());
  double previous = 0.0;
  for (double t : checkpoints) {
    if (!(t > previous)) throw InputError("checkpoint times must be positive and increasing");
    if (t > duration * (1.0 + 1e-12)) {
      throw InputError("checkpoint " + std::to_string(t) + " s exceeds record duration " +
                       std::to_string(duration) + " s");
    }
    const auto idx = static_cast<std::size_t>(std::floor(t / dt + 1e-9));
    out.push_back(std::min(idx, sample_count - 1));
    previous = t;
  }
  return out;
}

LinearOscillator::LinearOscillator(double period, double damping, double dt)
    : substeps_(substeps_for(dt, period)) {
  if (!(period > 0.0)) throw InputError("oscillator period must be positive");
  h_ = dt / substeps_;
  const double w = 2.0 * std::numbers::pi / period;
  omega2_ = w * w;
  c_ = 2.0 * damping * w;
  inv_keff_ = 1.0 / (4.0 / (h_ * h_) + 2.0 * c_ / h_ + omega2_);
}

void LinearOscillator::advance(State& s, double ag0, double ag1) const noexcept {
  const double a0 = 4.0 / (h_ * h_);
  const double b = 4.0 / h_;
  for (int j = 1; j <= substeps_; ++j) {
    const double ag = ag0 + (static_cast<double>(j) / substeps_) * (ag1 - ag0);
    const double rhs = -ag + s.a + (b + c_) * s.v;
    const double delta = (rhs - omega2_ * s.u) * inv_keff_;
    const double v = (2.0 / h_) * delta - s.v;
    const double a = a0 * delta - b * s.v - s.a;
    s.u += delta;
    s.v = v;
    s.a = a;
    s.max_acceleration = std::max(s.max_acceleration, std::abs(a + ag));
    s.max_displacement = std::max(s.max_displacement, std::abs(s.u));
  }
}

SpectrumPair response_spectra(const AccelerationRecord& record, std::span<const double> periods,
                              std::span<const double> checkpoints, double damping, int workers) {
  if (periods.empty()) throw InputError("period grid is empty");
  for (double T : periods) {
    if (!(T > 0.0)) throw InputError("periods must be positive");
  }
  const auto marks = checkpoint_samples(checkpoints, record.dt(), record.size());
  std::vector<double> p(periods.begin(), periods.end());
  std::vector<double> t(checkpoints.begin(), checkpoints.end());
  SpectrumPair out{RunningSpectrum(SpectrumKind::Acceleration, p, t),
                   RunningSpectrum(SpectrumKind::Displacement, p, t)};
  const auto& ag = record.samples();
  parallel_for(periods.size(), workers, [&](std::size_t j) {
    const LinearOscillator osc(periods[j], damping, record.dt());
    LinearOscillator::State s;
    s.a = -ag[0];
    std::size_t k = 0;
    for (std::size_t i = 0; i < ag.size() && k < marks.size(); ++i) {
      if (i > 0) osc.advance(s, ag[i - 1], ag[i]);
      while (k < marks.size() && marks[k] == i) {
        out.acceleration.at(j, k) = s.max_acceleration;
        out.displacement.at(j, k) = s.max_displacement;
        ++k;
      }
    }
  });
  return out;
}

}  // namespace etforge
