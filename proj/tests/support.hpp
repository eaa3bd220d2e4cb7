// Shared helpers for the unit tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "etforge/generator.hpp"
#include "etforge/target.hpp"

namespace etforge::testing {

inline std::vector<double> random_signal(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

inline double relative_error(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

/// Small generation problem that runs in well under a second per objective.
inline GenerationProblem small_problem(VariableSpace space = VariableSpace::TimeDomain) {
  GenerationProblem p;
  p.name = "ETA-test";
  p.duration = 5.12;
  p.dt = 0.02;
  p.space = space;
  p.wavelet_levels = 4;
  p.target.profile = IntensifyingProfile::linear(2.5);
  p.target.periods = make_period_grid(0.1, 2.0, 8, GridSpacing::Log);
  p.target.checkpoints = {1.25, 2.5, 3.75, 5.0};
  p.optimizer.max_iterations = 4;
  return p;
}

}  // namespace etforge::testing
