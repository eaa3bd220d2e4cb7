#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace etforge::detail {

/// Gaussian white noise passed through zero-phase second-order Butterworth
/// high-pass (f_low) and low-pass (f_high) sections.
std::vector<double> band_limited_noise(std::size_t count, double dt, double f_low, double f_high,
                                       std::uint64_t rng_seed);

}  // namespace etforge::detail
