// Periodized orthogonal discrete wavelet transform.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace etforge {

enum class WaveletBasis { Haar, Daubechies4 };

WaveletBasis parse_wavelet_basis(std::string_view name);
std::string_view to_string(WaveletBasis basis);

/// Low-pass analysis filter of an orthogonal basis (unit norm).
std::vector<double> scaling_filter(WaveletBasis basis);
/// High-pass filter g[n] = (-1)^n h[L-1-n].
std::vector<double> wavelet_filter(WaveletBasis basis);

/// Multi-level decomposition. `bands[0]` is the deepest approximation,
/// `bands[1]` the deepest detail, ..., `bands[levels]` the finest detail.
struct WaveletDecomposition {
  WaveletBasis basis = WaveletBasis::Haar;
  int levels = 0;
  std::size_t original_length = 0;
  std::size_t padded_length = 0;
  std::vector<std::vector<double>> bands;

  std::size_t coefficient_count() const;
  /// Flattened coefficients in band order.
  std::vector<double> flatten() const;
  /// Inverse of flatten(); band sizes are taken from this decomposition.
  void assign(std::span<const double> flat);
  /// Band index (0 = approximation) of a flattened coefficient.
  std::size_t band_of(std::size_t flat_index) const;
  /// Detail level of band b: band 1 is level `levels`, band `levels` is level 1.
  int detail_level_of_band(std::size_t band) const { return levels + 1 - static_cast<int>(band); }
};

/// Forward transform. Input is zero-extended to a multiple of 2^levels.
WaveletDecomposition dwt_forward(std::span<const double> signal, int levels, WaveletBasis basis);

/// Inverse transform, truncated to the original length.
std::vector<double> dwt_inverse(const WaveletDecomposition& decomposition);

}  // namespace etforge
