#include "etforge/generator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>

#include "etforge/parallel.hpp"
#include "noise.hpp"

namespace etforge {

VariableSpace parse_variable_space(std::string_view name) {
  if (name == "time-domain") return VariableSpace::TimeDomain;
  if (name == "wavelet") return VariableSpace::Wavelet;
  if (name == "wavelet-masked") return VariableSpace::WaveletMasked;
  throw InputError("unknown variable space '" + std::string(name) +
                   "' (expected time-domain, wavelet or wavelet-masked)");
}

std::string_view to_string(VariableSpace space) {
  switch (space) {
    case VariableSpace::TimeDomain: return "time-domain";
    case VariableSpace::Wavelet: return "wavelet";
    case VariableSpace::WaveletMasked: return "wavelet-masked";
  }
  return "time-domain";
}

ResidualKind parse_residual_kind(std::string_view name) {
  if (name == "absolute") return ResidualKind::Absolute;
  if (name == "relative") return ResidualKind::Relative;
  throw InputError("unknown residual kind '" + std::string(name) +
                   "' (expected absolute or relative)");
}

std::string_view to_string(ResidualKind kind) {
  return kind == ResidualKind::Absolute ? "absolute" : "relative";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::ZeroObjective: return "zero-objective";
    case Termination::ObjectiveTolerance: return "objective-tolerance";
    case Termination::StepTolerance: return "step-tolerance";
    case Termination::IterationLimit: return "iteration-limit";
    case Termination::Stalled: return "stalled";
  }
  return "stalled";
}

std::size_t GenerationProblem::variable_sample_count() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

void GenerationProblem::validate() const {
  if (!(dt > 0.0) || !(duration > 0.0)) throw InputError("problem: dt and duration must be positive");
  const double steps = duration / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6 || std::round(steps) < 2) {
    throw InputError("problem: duration must be an integer multiple (>= 2) of dt");
  }
  if (!(damping >= 0.0 && damping < 1.0)) throw InputError("problem: damping must be in [0, 1)");
  if (alpha && !(*alpha >= 0.0)) throw InputError("problem: alpha must be non-negative");
  target.validate();
  if (target.checkpoints.back() > duration * (1.0 + 1e-12)) {
    throw InputError("problem: checkpoint times must lie in (0, duration]");
  }
  if (space != VariableSpace::TimeDomain) {
    const std::size_t n = variable_sample_count();
    if ((n & (n - 1)) != 0) {
      throw InputError("problem: wavelet spaces need duration / dt to be a power of two, got " +
                       std::to_string(n));
    }
    if (wavelet_levels < 1 || (std::size_t{1} << wavelet_levels) > n) {
      throw InputError("problem: wavelet levels must be in [1, log2(duration / dt)]");
    }
    if (space == VariableSpace::WaveletMasked) {
      for (int level : masked_levels) {
        if (level < 1 || level > wavelet_levels) {
          throw InputError("problem: masked level " + std::to_string(level) +
                           " outside [1, wavelet_levels]");
        }
      }
    }
  }
  if (optimizer.max_iterations < 0 || optimizer.max_damping_trials < 1) {
    throw InputError("problem: invalid optimizer settings");
  }
}

std::vector<double> period_weights(std::span<const double> periods) {
  const std::size_t n = periods.size();
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double half = 0.5 * (periods[j + 1] - periods[j]);
    w[j] += half;
    w[j + 1] += half;
  }
  return w;
}

std::vector<double> time_weights(std::span<const double> checkpoints) {
  const std::size_t n = checkpoints.size();
  std::vector<double> w(n, 0.0);
  double previous = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double half = 0.5 * (checkpoints[k] - previous);
    w[k] += half;
    if (k > 0) w[k - 1] += half;
    previous = checkpoints[k];
  }
  return w;
}

ResidualEvaluator::ResidualEvaluator(const GenerationProblem& problem, double alpha)
    : periods_(problem.target.periods.size()),
      checkpoints_(problem.target.checkpoints.size()),
      alpha_(alpha),
      dt_(problem.dt),
      period_grid_(problem.target.periods),
      time_grid_(problem.target.checkpoints) {
  problem.validate();
  if (!(alpha >= 0.0)) throw InputError("alpha must be non-negative");
  marks_ = etforge::checkpoint_samples(time_grid_, dt_, problem.sample_count());
  oscillators_.reserve(periods_);
  for (double T : period_grid_) oscillators_.emplace_back(T, problem.damping, dt_);

  const auto surface = target_surface(problem.target);
  target_acc_ = surface.acceleration.values;
  target_disp_ = surface.displacement.values;

  const auto wp = period_weights(period_grid_);
  const auto wt = time_weights(time_grid_);
  double floor_acc = 0.0;
  double floor_disp = 0.0;
  for (double T : period_grid_) {
    floor_acc = std::max(floor_acc, problem.target.base.acceleration(T));
    floor_disp = std::max(floor_disp, problem.target.base.displacement(T));
  }
  floor_acc *= 1e-3;
  floor_disp *= 1e-3;

  scale_acc_.resize(periods_ * checkpoints_);
  scale_disp_.resize(periods_ * checkpoints_);
  for (std::size_t j = 0; j < periods_; ++j) {
    for (std::size_t k = 0; k < checkpoints_; ++k) {
      const std::size_t c = j * checkpoints_ + k;
      const double w = wp[j] * wt[k];
      double na = 1.0;
      double nd = 1.0;
      if (problem.residual == ResidualKind::Relative) {
        na = target_acc_[c];
        nd = target_disp_[c];
        if (na < floor_acc) {
          na = floor_acc;
          ++floored_cells_;
        }
        if (nd < floor_disp) {
          nd = floor_disp;
          ++floored_cells_;
        }
      }
      scale_acc_[c] = std::sqrt(w) / na;
      scale_disp_[c] = std::sqrt(alpha * w) / nd;
    }
  }
}

void ResidualEvaluator::fill(std::size_t j, std::size_t k, double sa, double su,
                             std::span<double> out) const {
  const std::size_t c = j * checkpoints_ + k;
  out[c] = (sa - target_acc_[c]) * scale_acc_[c];
  out[periods_ * checkpoints_ + c] = (su - target_disp_[c]) * scale_disp_[c];
}

std::vector<double> ResidualEvaluator::residuals(std::span<const double> samples) const {
  return trace(samples).residuals;
}

ResidualEvaluator::Trace ResidualEvaluator::trace(std::span<const double> samples) const {
  if (samples.size() <= marks_.back()) throw InputError("record shorter than checkpoint grid");
  const std::size_t last = marks_.back();
  Trace t;
  t.states.resize(periods_);
  t.residuals.assign(residual_count(), 0.0);
  for (std::size_t j = 0; j < periods_; ++j) {
    auto& states = t.states[j];
    states.resize(last + 1);
    LinearOscillator::State s;
    s.a = -samples[0];
    states[0] = s;
    std::size_t k = 0;
    for (std::size_t i = 0; i <= last; ++i) {
      if (i > 0) {
        oscillators_[j].advance(s, samples[i - 1], samples[i]);
        states[i] = s;
      }
      while (k < checkpoints_ && marks_[k] == i) {
        fill(j, k, s.max_acceleration, s.max_displacement, t.residuals);
        ++k;
      }
    }
  }
  return t;
}

void ResidualEvaluator::residuals_from(const Trace& base, std::span<const double> samples,
                                       std::size_t first_changed, std::span<double> out) const {
  std::copy(base.residuals.begin(), base.residuals.end(), out.begin());
  const std::size_t last = marks_.back();
  if (first_changed > last) return;
  const std::size_t k0 = static_cast<std::size_t>(
      std::lower_bound(marks_.begin(), marks_.end(), first_changed) - marks_.begin());
  for (std::size_t j = 0; j < periods_; ++j) {
    LinearOscillator::State s;
    std::size_t i = first_changed;
    if (first_changed == 0) {
      s.a = -samples[0];
      i = 1;
      for (std::size_t k = 0; k < checkpoints_ && marks_[k] == 0; ++k) {
        fill(j, k, s.max_acceleration, s.max_displacement, out);
      }
    } else {
      s = base.states[j][first_changed - 1];
    }
    std::size_t k = k0;
    for (; i <= last && k < checkpoints_; ++i) {
      oscillators_[j].advance(s, samples[i - 1], samples[i]);
      while (k < checkpoints_ && marks_[k] == i) {
        fill(j, k, s.max_acceleration, s.max_displacement, out);
        ++k;
      }
    }
  }
}

SpectrumPair ResidualEvaluator::spectra(std::span<const double> samples) const {
  const auto t = trace(samples);
  SpectrumPair out{RunningSpectrum(SpectrumKind::Acceleration, period_grid_, time_grid_),
                   RunningSpectrum(SpectrumKind::Displacement, period_grid_, time_grid_)};
  for (std::size_t j = 0; j < periods_; ++j) {
    for (std::size_t k = 0; k < checkpoints_; ++k) {
      const auto& s = t.states[j][marks_[k]];
      out.acceleration.at(j, k) = s.max_acceleration;
      out.displacement.at(j, k) = s.max_displacement;
    }
  }
  return out;
}

SpectrumPair ResidualEvaluator::raw_residuals(std::span<const double> samples) const {
  auto out = spectra(samples);
  for (std::size_t c = 0; c < out.acceleration.values.size(); ++c) {
    out.acceleration.values[c] -= target_acc_[c];
    out.displacement.values[c] -= target_disp_[c];
  }
  return out;
}

namespace {

void check_record(const AccelerationRecord& record, const GenerationProblem& problem) {
  if (std::abs(record.dt() - problem.dt) > 1e-12 * problem.dt) {
    throw InputError("record dt " + std::to_string(record.dt()) + " differs from problem dt " +
                     std::to_string(problem.dt));
  }
  if (record.size() != problem.sample_count()) {
    throw InputError("record has " + std::to_string(record.size()) + " samples, problem needs " +
                     std::to_string(problem.sample_count()));
  }
}

std::size_t closest_checkpoint(const std::vector<double>& checkpoints, double t) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < checkpoints.size(); ++k) {
    if (std::abs(checkpoints[k] - t) < std::abs(checkpoints[best] - t)) best = k;
  }
  return best;
}

}  // namespace

double balance_alpha(const GenerationProblem& problem, const AccelerationRecord& seed) {
  check_record(seed, problem);
  const ResidualEvaluator unit(problem, 1.0);
  const auto r = unit.residuals(seed.samples());
  const std::size_t periods = unit.period_count();
  const std::size_t checkpoints = unit.checkpoint_count();
  const std::size_t k = closest_checkpoint(problem.target.checkpoints,
                                           problem.target.profile.target_time());
  double acc = 0.0;
  double disp = 0.0;
  for (std::size_t j = 0; j < periods; ++j) {
    const std::size_t c = j * checkpoints + k;
    acc += r[c] * r[c];
    disp += r[periods * checkpoints + c] * r[periods * checkpoints + c];
  }
  if (acc > 0.0 && disp > 1e-300) return acc / disp;
  // Degenerate seed residuals: balance the target magnitudes instead.
  double ta = 0.0;
  double td = 0.0;
  for (double T : problem.target.periods) {
    ta += std::pow(problem.target.base.acceleration(T), 2);
    td += std::pow(problem.target.base.displacement(T), 2);
  }
  return ta / td;
}

GenerationProblem with_resolved_alpha(const GenerationProblem& problem,
                                      const AccelerationRecord& seed) {
  GenerationProblem out = problem;
  if (!out.alpha) out.alpha = balance_alpha(problem, seed);
  return out;
}

double objective(const AccelerationRecord& record, const GenerationProblem& problem) {
  if (!problem.alpha) throw InputError("objective: alpha is unresolved (auto)");
  check_record(record, problem);
  const ResidualEvaluator unit(problem, 1.0);
  const auto r = unit.residuals(record.samples());
  const std::size_t half = r.size() / 2;
  double acc = 0.0;
  double disp = 0.0;
  for (std::size_t c = 0; c < half; ++c) {
    acc += r[c] * r[c];
    disp += r[half + c] * r[half + c];
  }
  return acc + *problem.alpha * disp;
}

std::vector<double> residual_vector(const AccelerationRecord& record,
                                    const GenerationProblem& problem) {
  if (!problem.alpha) throw InputError("residual_vector: alpha is unresolved (auto)");
  check_record(record, problem);
  return ResidualEvaluator(problem, *problem.alpha).residuals(record.samples());
}

AccelerationRecord seed_record(const GenerationProblem& problem, std::uint64_t rng_seed) {
  problem.validate();
  const std::size_t n = problem.sample_count();
  const auto noise = detail::band_limited_noise(n, problem.dt, 1.0 / problem.target.periods.back(),
                                                1.0 / problem.target.periods.front(), rng_seed);

  std::vector<double> samples(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    samples[i] = noise[i] * problem.target.profile.value(problem.dt * static_cast<double>(i));
  }
  if (problem.space == VariableSpace::WaveletMasked) {
    const VariableMap map(problem);
    samples = map.to_samples(map.to_variables(samples));
  }

  AccelerationRecord raw(problem.dt, samples, problem.name);
  const double duration = problem.dt * static_cast<double>(n - 1);
  const double t_ref = std::min(problem.target.profile.target_time(), duration);
  const std::vector<double> at{t_ref};
  const auto spectra = response_spectra(raw, problem.target.periods, at, problem.damping,
                                        problem.workers);
  double ratio = 0.0;
  for (std::size_t j = 0; j < problem.target.periods.size(); ++j) {
    ratio += spectra.acceleration.at(j, 0) /
             (problem.target.profile.value(t_ref) *
              problem.target.base.acceleration(problem.target.periods[j]));
  }
  ratio /= static_cast<double>(problem.target.periods.size());
  if (!(ratio > 0.0)) return raw;
  return raw.scaled(1.0 / ratio);
}

VariableMap::VariableMap(const GenerationProblem& problem)
    : space_(problem.space), samples_(problem.variable_sample_count()) {
  if (space_ == VariableSpace::TimeDomain) {
    size_ = samples_;
    return;
  }
  const std::vector<double> zeros(samples_, 0.0);
  layout_ = dwt_forward(zeros, problem.wavelet_levels, problem.basis);
  const std::size_t total = layout_.coefficient_count();
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t band = layout_.band_of(i);
    bool frozen = false;
    if (space_ == VariableSpace::WaveletMasked && band > 0) {
      const int level = layout_.detail_level_of_band(band);
      frozen = std::find(problem.masked_levels.begin(), problem.masked_levels.end(), level) !=
               problem.masked_levels.end();
    }
    if (!frozen) active_.push_back(i);
  }
  size_ = active_.size();
}

std::vector<double> VariableMap::to_variables(std::span<const double> samples) const {
  if (samples.size() != samples_ + 1) throw InputError("variable map: sample count mismatch");
  const auto tail = samples.subspan(1);
  if (space_ == VariableSpace::TimeDomain) return {tail.begin(), tail.end()};
  const auto flat = dwt_forward(tail, layout_.levels, layout_.basis).flatten();
  std::vector<double> x(size_);
  for (std::size_t v = 0; v < size_; ++v) x[v] = flat[active_[v]];
  return x;
}

std::vector<double> VariableMap::to_samples(std::span<const double> variables) const {
  if (variables.size() != size_) throw InputError("variable map: variable count mismatch");
  std::vector<double> out(samples_ + 1, 0.0);
  if (space_ == VariableSpace::TimeDomain) {
    std::copy(variables.begin(), variables.end(), out.begin() + 1);
    return out;
  }
  std::vector<double> flat(layout_.coefficient_count(), 0.0);
  for (std::size_t v = 0; v < size_; ++v) flat[active_[v]] = variables[v];
  WaveletDecomposition d = layout_;
  d.assign(flat);
  const auto signal = dwt_inverse(d);
  std::copy(signal.begin(), signal.end(), out.begin() + 1);
  return out;
}

VariableMap::Footprint VariableMap::footprint(std::size_t variable) const {
  if (variable >= size_) throw InputError("variable map: index out of range");
  if (space_ == VariableSpace::TimeDomain) return {variable + 1, {1.0}};
  std::vector<double> flat(layout_.coefficient_count(), 0.0);
  flat[active_[variable]] = 1.0;
  WaveletDecomposition d = layout_;
  d.assign(flat);
  const auto signal = dwt_inverse(d);
  std::size_t first = 0;
  while (first < signal.size() && signal[first] == 0.0) ++first;
  std::size_t last = signal.size();
  while (last > first && signal[last - 1] == 0.0) --last;
  return {first + 1, std::vector<double>(signal.begin() + static_cast<std::ptrdiff_t>(first),
                                         signal.begin() + static_cast<std::ptrdiff_t>(last))};
}

namespace {

double sum_squares(const std::vector<double>& r) {
  return std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
}

}  // namespace

GenerationResult generate_from(const GenerationProblem& input, const AccelerationRecord& start) {
  input.validate();
  check_record(start, input);
  const GenerationProblem problem = with_resolved_alpha(input, start);
  const ResidualEvaluator evaluator(problem, *problem.alpha);
  const VariableMap map(problem);

  std::vector<double> x = map.to_variables(start.samples());
  std::vector<double> samples = map.to_samples(x);
  auto base = evaluator.trace(samples);
  double f = sum_squares(base.residuals);

  GenerationReport report;
  report.alpha = *problem.alpha;
  report.space = problem.space;
  report.variables = map.size();
  report.residuals = evaluator.residual_count();
  report.floored_cells = evaluator.floored_cells();
  report.seed_objective = f;
  report.objective_history.push_back(f);

  const std::size_t m = evaluator.residual_count();
  const std::size_t n = map.size();
  Eigen::MatrixXd jac(m, n);
  double mu = -1.0;
  report.termination = Termination::IterationLimit;
  if (f == 0.0) report.termination = Termination::ZeroObjective;

  for (int iter = 0; iter < problem.optimizer.max_iterations && f > 0.0; ++iter) {
    const auto clock_start = std::chrono::steady_clock::now();
    double x_inf = 0.0;
    for (double v : x) x_inf = std::max(x_inf, std::abs(v));
    const double h = std::max(1e-6, 1e-4 * x_inf);

    parallel_for(n, problem.workers, [&](std::size_t v) {
      const auto fp = map.footprint(v);
      std::vector<double> perturbed = samples;
      for (std::size_t i = 0; i < fp.values.size(); ++i) perturbed[fp.first + i] += h * fp.values[i];
      std::vector<double> r(m);
      evaluator.residuals_from(base, perturbed, fp.first, r);
      for (std::size_t row = 0; row < m; ++row) {
        const double d = (r[row] - base.residuals[row]) / h;
        if (!std::isfinite(d)) throw NumericalError("non-finite Jacobian entry for variable", v);
        jac(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(v)) = d;
      }
    });

    const Eigen::Map<const Eigen::VectorXd> r0(base.residuals.data(), static_cast<Eigen::Index>(m));
    const bool dual = m <= n;
    const Eigen::MatrixXd normal = dual ? Eigen::MatrixXd(jac * jac.transpose())
                                        : Eigen::MatrixXd(jac.transpose() * jac);
    const Eigen::VectorXd gradient = jac.transpose() * r0;
    if (mu < 0.0) mu = 1e-3 * std::max(normal.diagonal().maxCoeff(), 1e-12);

    bool accepted = false;
    double f_new = f;
    Eigen::VectorXd step;
    ResidualEvaluator::Trace candidate;
    std::vector<double> x_new;
    std::vector<double> samples_new;
    for (int trial = 0; trial < problem.optimizer.max_damping_trials; ++trial) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal().array() += mu;
      const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      step = dual ? Eigen::VectorXd(-(jac.transpose() * solver.solve(r0)))
                  : Eigen::VectorXd(-solver.solve(gradient));
      x_new = x;
      for (std::size_t v = 0; v < n; ++v) x_new[v] += step(static_cast<Eigen::Index>(v));
      samples_new = map.to_samples(x_new);
      candidate = evaluator.trace(samples_new);
      f_new = sum_squares(candidate.residuals);
      if (std::isfinite(f_new) && f_new < f) {
        accepted = true;
        mu /= 3.0;
        break;
      }
      mu *= 10.0;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    report.iteration_seconds.push_back(seconds);
    if (!accepted) {
      report.termination = Termination::Stalled;
      break;
    }
    const double decrease = f - f_new;
    double x_norm = 0.0;
    for (double v : x) x_norm += v * v;
    x = std::move(x_new);
    samples = std::move(samples_new);
    base = std::move(candidate);
    f = f_new;
    report.objective_history.push_back(f);
    if (f == 0.0) {
      report.termination = Termination::ZeroObjective;
      break;
    }
    if (decrease <= problem.optimizer.objective_tolerance * (f + decrease)) {
      report.termination = Termination::ObjectiveTolerance;
      break;
    }
    const double tol = problem.optimizer.step_tolerance;
    if (step.norm() <= tol * (std::sqrt(x_norm) + tol)) {
      report.termination = Termination::StepTolerance;
      break;
    }
  }

  report.final_objective = f;
  report.final_residuals = evaluator.raw_residuals(samples);

  std::map<std::string, std::string> meta = start.meta();
  const auto exact = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  };
  meta["target_time"] = exact(problem.target.profile.target_time());
  meta["profile"] = std::string(to_string(problem.target.profile.kind()));
  meta["space"] = std::string(to_string(problem.space));
  meta["alpha"] = exact(*problem.alpha);
  AccelerationRecord record(problem.dt, std::move(samples), problem.name, std::move(meta));
  return {std::move(record), std::move(report)};
}

GenerationResult generate(const GenerationProblem& problem, std::uint64_t rng_seed) {
  auto seed = seed_record(problem, rng_seed).with_meta("generation_seed", std::to_string(rng_seed));
  return generate_from(problem, seed);
}

VerificationReport verify_etef(const AccelerationRecord& record, const TargetModel& target,
                               const VerificationTolerance& tolerance, double damping) {
  target.validate();
  const double duration = record.duration();
  const double t_target = target.profile.target_time();
  if (t_target > duration * (1.0 + 1e-12)) {
    throw InputError("verify: target time exceeds record duration");
  }
  VerificationReport rep;
  rep.periods = target.periods;
  rep.target_time = t_target;
  std::vector<double> times;
  for (double t : target.checkpoints) {
    if (t <= duration * (1.0 + 1e-12)) times.push_back(t);
  }
  times.push_back(t_target);
  const double top = target.profile.value(duration);
  if (tolerance.ratio_intensity > 0.0 && tolerance.ratio_intensity <= top) {
    rep.gated_time = intensity_to_time(target.profile, tolerance.ratio_intensity, duration);
    times.push_back(*rep.gated_time);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              times.end());
  rep.times = times;

  const auto spectra = response_spectra(record, target.periods, times, damping);
  const auto at = [&](double t) {
    return static_cast<std::size_t>(
        std::min_element(times.begin(), times.end(),
                         [&](double a, double b) { return std::abs(a - t) < std::abs(b - t); }) -
        times.begin());
  };
  const std::size_t k_target = at(t_target);
  const std::size_t np = target.periods.size();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double g = target.profile.value(times[k]);
    rep.intensities.push_back(g);
    double misfit = 0.0;
    std::vector<double> ratios(np);
    std::size_t in_band = 0;
    for (std::size_t j = 0; j < np; ++j) {
      const double goal = g * target.base.acceleration(target.periods[j]);
      misfit += std::abs(spectra.acceleration.at(j, k) - goal) / goal;
      const double denom = spectra.acceleration.at(j, k_target);
      ratios[j] = denom > 0.0 ? spectra.acceleration.at(j, k) / denom
                              : std::numeric_limits<double>::quiet_NaN();
      if (ratios[j] >= g * (1.0 - tolerance.ratio_band) &&
          ratios[j] <= g * (1.0 + tolerance.ratio_band)) {
        ++in_band;
      }
    }
    rep.mean_misfit.push_back(misfit / static_cast<double>(np));
    rep.ratios.push_back(std::move(ratios));
    rep.ratio_fraction_in_band.push_back(static_cast<double>(in_band) / static_cast<double>(np));
  }
  rep.misfit_at_target = rep.mean_misfit[k_target];
  rep.misfit_ok = rep.misfit_at_target <= tolerance.misfit;
  if (rep.gated_time) {
    rep.gated_fraction = rep.ratio_fraction_in_band[at(*rep.gated_time)];
    rep.ratio_ok = rep.gated_fraction >= tolerance.ratio_min_fraction;
  } else {
    rep.ratio_ok = true;
  }
  rep.passed = rep.misfit_ok && rep.ratio_ok;
  return rep;
}

}  // namespace etforge
