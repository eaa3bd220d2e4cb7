#include "etforge/wavelet.hpp"

#include <cmath>
#include <string>

#include "etforge/record.hpp"

namespace etforge {

WaveletBasis parse_wavelet_basis(std::string_view name) {
  if (name == "haar") return WaveletBasis::Haar;
  if (name == "db2" || name == "daubechies4") return WaveletBasis::Daubechies4;
  throw InputError("unknown wavelet basis '" + std::string(name) + "' (expected haar or db2)");
}

std::string_view to_string(WaveletBasis basis) {
  return basis == WaveletBasis::Haar ? "haar" : "db2";
}

std::vector<double> scaling_filter(WaveletBasis basis) {
  if (basis == WaveletBasis::Haar) {
    const double s = 1.0 / std::sqrt(2.0);
    return {s, s};
  }
  const double r3 = std::sqrt(3.0);
  const double d = 4.0 * std::sqrt(2.0);
  return {(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d};
}

std::vector<double> wavelet_filter(WaveletBasis basis) {
  const auto h = scaling_filter(basis);
  std::vector<double> g(h.size());
  for (std::size_t n = 0; n < h.size(); ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    g[n] = sign * h[h.size() - 1 - n];
  }
  return g;
}

std::size_t WaveletDecomposition::coefficient_count() const {
  std::size_t n = 0;
  for (const auto& b : bands) n += b.size();
  return n;
}

std::vector<double> WaveletDecomposition::flatten() const {
  std::vector<double> flat;
  flat.reserve(coefficient_count());
  for (const auto& b : bands) flat.insert(flat.end(), b.begin(), b.end());
  return flat;
}

void WaveletDecomposition::assign(std::span<const double> flat) {
  if (flat.size() != coefficient_count()) {
    throw InputError("wavelet assign: expected " + std::to_string(coefficient_count()) +
                     " coefficients, got " + std::to_string(flat.size()));
  }
  std::size_t k = 0;
  for (auto& b : bands) {
    for (double& c : b) c = flat[k++];
  }
}

std::size_t WaveletDecomposition::band_of(std::size_t flat_index) const {
  for (std::size_t b = 0; b < bands.size(); ++b) {
    if (flat_index < bands[b].size()) return b;
    flat_index -= bands[b].size();
  }
  throw InputError("wavelet band_of: index out of range");
}

namespace {

void analysis_step(std::span<const double> x, const std::vector<double>& h,
                   const std::vector<double>& g, std::vector<double>& approx,
                   std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
      const double v = x[(2 * k + j) % n];
      a += h[j] * v;
      d += g[j] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

std::vector<double> synthesis_step(const std::vector<double>& approx,
                                   const std::vector<double>& detail, const std::vector<double>& h,
                                   const std::vector<double>& g) {
  const std::size_t n = 2 * approx.size();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < approx.size(); ++k) {
    for (std::size_t j = 0; j < h.size(); ++j) {
      x[(2 * k + j) % n] += h[j] * approx[k] + g[j] * detail[k];
    }
  }
  return x;
}

}  // namespace

WaveletDecomposition dwt_forward(std::span<const double> signal, int levels, WaveletBasis basis) {
  if (levels < 1) throw InputError("dwt_forward: levels must be >= 1");
  const std::size_t block = std::size_t{1} << levels;
  if (signal.size() < block) {
    throw InputError("dwt_forward: signal of length " + std::to_string(signal.size()) +
                     " is too short for " + std::to_string(levels) +
                     " levels; minimum length is " + std::to_string(block));
  }
  WaveletDecomposition out;
  out.basis = basis;
  out.levels = levels;
  out.original_length = signal.size();
  out.padded_length = ((signal.size() + block - 1) / block) * block;

  std::vector<double> current(out.padded_length, 0.0);
  std::copy(signal.begin(), signal.end(), current.begin());
  const auto h = scaling_filter(basis);
  const auto g = wavelet_filter(basis);

  std::vector<std::vector<double>> details;
  for (int level = 0; level < levels; ++level) {
    std::vector<double> approx;
    std::vector<double> detail;
    analysis_step(current, h, g, approx, detail);
    details.push_back(std::move(detail));
    current = std::move(approx);
  }
  out.bands.push_back(std::move(current));
  for (auto it = details.rbegin(); it != details.rend(); ++it) out.bands.push_back(std::move(*it));
  return out;
}

std::vector<double> dwt_inverse(const WaveletDecomposition& d) {
  if (d.levels < 1 || d.bands.size() != static_cast<std::size_t>(d.levels) + 1) {
    throw InputError("dwt_inverse: expected " + std::to_string(d.levels + 1) + " bands, got " +
                     std::to_string(d.bands.size()));
  }
  if (d.padded_length != (d.bands[0].size() << d.levels) || d.original_length > d.padded_length ||
      d.original_length == 0) {
    throw InputError("dwt_inverse: band lengths inconsistent with recorded lengths");
  }
  for (std::size_t b = 1; b < d.bands.size(); ++b) {
    const std::size_t expected = d.bands[0].size() << (b - 1);
    if (d.bands[b].size() != expected) {
      throw InputError("dwt_inverse: detail band " + std::to_string(b) + " has length " +
                       std::to_string(d.bands[b].size()) + ", expected " +
                       std::to_string(expected));
    }
  }
  const auto h = scaling_filter(d.basis);
  const auto g = wavelet_filter(d.basis);
  std::vector<double> current = d.bands[0];
  for (std::size_t b = 1; b < d.bands.size(); ++b) {
    current = synthesis_step(current, d.bands[b], h, g);
  }
  current.resize(d.original_length);
  return current;
}

}  // namespace etforge
