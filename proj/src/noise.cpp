#include "noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace etforge::detail {
namespace {

// RBJ biquad, run forward then backward.
void zero_phase_biquad(std::vector<double>& x, double cutoff, double fs, bool high_pass) {
  const double w0 = 2.0 * std::numbers::pi * cutoff / fs;
  const double alpha = std::sin(w0) / std::sqrt(2.0);
  const double cw = std::cos(w0);
  const double b0 = high_pass ? (1.0 + cw) / 2.0 : (1.0 - cw) / 2.0;
  const double b1 = high_pass ? -(1.0 + cw) : 1.0 - cw;
  const double b2 = b0;
  const double a0 = 1.0 + alpha;
  const double a1 = -2.0 * cw;
  const double a2 = 1.0 - alpha;
  auto pass = [&](auto begin, auto end) {
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (auto it = begin; it != end; ++it) {
      const double in = *it;
      const double y = (b0 * in + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2) / a0;
      x2 = x1;
      x1 = in;
      y2 = y1;
      y1 = y;
      *it = y;
    }
  };
  pass(x.begin(), x.end());
  pass(x.rbegin(), x.rend());
}

}  // namespace

std::vector<double> band_limited_noise(std::size_t count, double dt, double f_low, double f_high,
                                       std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> noise(count);
  for (double& v : noise) v = normal(rng);
  const double fs = 1.0 / dt;
  zero_phase_biquad(noise, f_low, fs, true);
  zero_phase_biquad(noise, std::min(f_high, 0.45 * fs), fs, false);
  return noise;
}

}  // namespace etforge::detail
