#pragma once

#include <cstdint>
#include <random>

#include "bh/spectral.hpp"

namespace bh {

/// Seeded generator of smooth random test fields: modes 1..max_mode with
/// independent Gaussian coefficients scaled by (1+k²)^{-1}. Mean zero and no
/// Nyquist content, so H∘H = -I holds exactly on every sample.
class RandomFieldSource {
 public:
  explicit RandomFieldSource(std::uint64_t seed) : rng_(seed) {}

  SpectrumField spectrum(std::size_t n, std::size_t max_mode) {
    SpectrumField s(n);
    max_mode = std::min(max_mode, n / 2 - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 1; k <= max_mode; ++k) {
      const double kk = static_cast<double>(k);
      const double scale = 1.0 / (1.0 + kk * kk);
      const double re = normal(rng_);
      const double im = normal(rng_);
      s[k] = scale * Complex(re, im);
    }
    return s;
  }

  /// Default band: modes 1..n/8.
  GridField field(std::size_t n) { return field(n, n / 8); }
  GridField field(std::size_t n, std::size_t max_mode) { return from_spectrum(spectrum(n, max_mode)); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace bh
