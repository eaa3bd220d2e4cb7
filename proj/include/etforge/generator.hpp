// Endurance time excitation synthesis: a least-squares fit of running response
// spectra to time-varying target surfaces, over time-domain or wavelet variables.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etforge/record.hpp"
#include "etforge/sdof.hpp"
#include "etforge/target.hpp"
#include "etforge/wavelet.hpp"

namespace etforge {

enum class VariableSpace { TimeDomain, Wavelet, WaveletMasked };
enum class ResidualKind { Absolute, Relative };

VariableSpace parse_variable_space(std::string_view name);
std::string_view to_string(VariableSpace space);
ResidualKind parse_residual_kind(std::string_view name);
std::string_view to_string(ResidualKind kind);

struct OptimizerSettings {
  int max_iterations = 60;
  double step_tolerance = 1e-10;       // relative to ||x||
  double objective_tolerance = 1e-6;   // relative decrease per accepted step
  int max_damping_trials = 12;
};

/// Everything needed to state the fitting problem. The record has
/// duration / dt + 1 samples; sample 0 (t = 0) is held at zero and the
/// remaining duration / dt samples are the optimisation variables.
struct GenerationProblem {
  std::string name = "ETA-custom";
  TargetModel target;
  double duration = 20.48;
  double dt = 0.02;
  double damping = kDefaultDamping;
  VariableSpace space = VariableSpace::TimeDomain;
  WaveletBasis basis = WaveletBasis::Daubechies4;
  int wavelet_levels = 6;
  /// Detail levels frozen at zero in the masked space (1 = finest band).
  std::vector<int> masked_levels{1};
  std::optional<double> alpha;  // empty: balanced automatically against the seed
  ResidualKind residual = ResidualKind::Absolute;
  OptimizerSettings optimizer;
  int workers = 1;

  std::size_t variable_sample_count() const;
  std::size_t sample_count() const { return variable_sample_count() + 1; }
  void validate() const;
};

/// Trapezoid weights over the period grid.
std::vector<double> period_weights(std::span<const double> periods);
/// Trapezoid weights over the checkpoints, with an extra node at t = 0 where
/// both the running spectra and the target vanish.
std::vector<double> time_weights(std::span<const double> checkpoints);

/// Evaluates weighted residuals for one problem. Residual layout: the
/// acceleration block then the displacement block, each period-major
/// (index = j * checkpoints + k).
class ResidualEvaluator {
 public:
  ResidualEvaluator(const GenerationProblem& problem, double alpha);

  std::size_t residual_count() const noexcept { return 2 * periods_ * checkpoints_; }
  std::size_t period_count() const noexcept { return periods_; }
  std::size_t checkpoint_count() const noexcept { return checkpoints_; }
  double alpha() const noexcept { return alpha_; }
  /// Cells whose relative residual used the guard floor instead of the target.
  std::size_t floored_cells() const noexcept { return floored_cells_; }
  const std::vector<std::size_t>& checkpoint_samples() const noexcept { return marks_; }

  /// Oscillator states after every sample, per period, used to restart
  /// integration part way through a record.
  struct Trace {
    std::vector<std::vector<LinearOscillator::State>> states;
    std::vector<double> residuals;
  };

  std::vector<double> residuals(std::span<const double> samples) const;
  Trace trace(std::span<const double> samples) const;
  /// Residuals of `samples`, which equal the traced samples before
  /// `first_changed`. Only checkpoints at or after that sample are recomputed.
  void residuals_from(const Trace& base, std::span<const double> samples,
                      std::size_t first_changed, std::span<double> out) const;

  /// Raw (unweighted, unnormalised) differences S - S_T on the grid.
  SpectrumPair raw_residuals(std::span<const double> samples) const;
  SpectrumPair spectra(std::span<const double> samples) const;

 private:
  void fill(std::size_t period, std::size_t checkpoint, double sa, double su,
            std::span<double> out) const;

  std::size_t periods_;
  std::size_t checkpoints_;
  double alpha_;
  double dt_;
  std::vector<double> period_grid_;
  std::vector<double> time_grid_;
  std::vector<std::size_t> marks_;
  std::vector<LinearOscillator> oscillators_;
  std::vector<double> target_acc_;
  std::vector<double> target_disp_;
  std::vector<double> scale_acc_;   // sqrt(w) / normaliser
  std::vector<double> scale_disp_;  // sqrt(alpha w) / normaliser
  std::size_t floored_cells_ = 0;
};

/// Weight alpha balancing acceleration and displacement terms of `seed` at
/// the checkpoint closest to the target time.
double balance_alpha(const GenerationProblem& problem, const AccelerationRecord& seed);

/// Problem copy with alpha resolved (explicit value kept, otherwise balanced against `seed`).
GenerationProblem with_resolved_alpha(const GenerationProblem& problem,
                                      const AccelerationRecord& seed);

/// Discretised double integral of squared residuals. Requires a resolved alpha.
double objective(const AccelerationRecord& record, const GenerationProblem& problem);
/// Weighted residuals whose squared norm equals objective().
std::vector<double> residual_vector(const AccelerationRecord& record,
                                    const GenerationProblem& problem);

/// Band-limited Gaussian noise modulated by g(t) and scaled to the base
/// target's mean level at the target time.
AccelerationRecord seed_record(const GenerationProblem& problem, std::uint64_t rng_seed);

/// Maps between a record and optimisation variables of the chosen space.
class VariableMap {
 public:
  explicit VariableMap(const GenerationProblem& problem);

  std::size_t size() const noexcept { return size_; }
  std::vector<double> to_variables(std::span<const double> samples) const;
  /// Full record samples (sample 0 = 0) for a variable vector.
  std::vector<double> to_samples(std::span<const double> variables) const;
  /// Change of the record per unit change of variable i, restricted to
  /// [first, first + values.size()) in record sample indices.
  struct Footprint {
    std::size_t first = 0;
    std::vector<double> values;
  };
  Footprint footprint(std::size_t variable) const;

 private:
  VariableSpace space_;
  std::size_t samples_;
  std::size_t size_;
  WaveletDecomposition layout_;
  std::vector<std::size_t> active_;  // flattened coefficient index per variable
};

enum class Termination { ZeroObjective, ObjectiveTolerance, StepTolerance, IterationLimit, Stalled };
std::string_view to_string(Termination t);

struct GenerationReport {
  std::vector<double> objective_history;  // seed objective first, then each accepted step
  std::vector<double> iteration_seconds;
  Termination termination = Termination::IterationLimit;
  double alpha = 0.0;
  double seed_objective = 0.0;
  double final_objective = 0.0;
  std::size_t variables = 0;
  std::size_t residuals = 0;
  std::size_t floored_cells = 0;
  VariableSpace space = VariableSpace::TimeDomain;
  SpectrumPair final_residuals;  // raw S - S_T
};

struct GenerationResult {
  AccelerationRecord record;
  GenerationReport report;
};

/// Damped Gauss-Newton fit starting from seed_record(problem, rng_seed).
GenerationResult generate(const GenerationProblem& problem, std::uint64_t rng_seed);
/// Same, starting from an explicit record.
GenerationResult generate_from(const GenerationProblem& problem, const AccelerationRecord& start);

struct VerificationTolerance {
  double misfit = 0.15;           // mean |relative misfit| at the target time
  double ratio_band = 0.2;        // accepted ratio interval g * [1 - band, 1 + band]
  double ratio_min_fraction = 0.8;
  double ratio_intensity = 2.0;   // scale factor whose time is gated
};

struct VerificationReport {
  std::vector<double> periods;
  std::vector<double> times;
  std::vector<double> intensities;                // g(t_k)
  std::vector<double> mean_misfit;                // per time
  std::vector<std::vector<double>> ratios;        // [time][period] S_a(T,t)/S_a(T,t_target)
  std::vector<double> ratio_fraction_in_band;     // per time
  double target_time = 0.0;
  double misfit_at_target = 0.0;
  std::optional<double> gated_time;
  double gated_fraction = 0.0;
  bool misfit_ok = false;
  bool ratio_ok = false;
  bool passed = false;
};

/// Checks an excitation against a target model at its checkpoints plus the
/// target time and the time of `ratio_intensity`.
VerificationReport verify_etef(const AccelerationRecord& record, const TargetModel& target,
                               const VerificationTolerance& tolerance = {},
                               double damping = kDefaultDamping);

}  // namespace etforge
