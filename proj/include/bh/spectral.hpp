#pragma once

// Fourier representation of 2π-periodic fields on a uniform grid and the
// exact Fourier-multiplier operators (H, ∂ₓ^m, |∂ₓ|^s) built on it.
//
// Coefficient convention: c_k = (1/2π) ∫₀^{2π} f(x) e^{-ikx} dx, i.e. the
// raw DFT divided by n. Only the Hermitian half k = 0..n/2 is stored.
//
// Nyquist mode: every odd symbol (H, odd derivatives) zeroes it, and
// dealiased products never produce it.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bh {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised for invalid grid sizes, mismatched operands and bad run settings.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void require_grid_size(std::size_t n) {
  if (n < 16 || !is_power_of_two(n)) {
    throw ConfigError("grid size must be a power of two >= 16, got " + std::to_string(n));
  }
}

namespace detail {

// One r2c/c2r plan pair per transform length. FFTW's planner is not
// thread-safe, execution is; plans are created once under a lock and then
// shared. FFTW_UNALIGNED lets the plans run on arbitrary std::vector storage.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::vector<double> real(n);
    std::vector<Complex> half(n / 2 + 1);
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_1d(len, real.data(), as_fftw(half.data()), flags);
    backward_ = fftw_plan_dft_c2r_1d(len, as_fftw(half.data()), real.data(), flags);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  // Unnormalized forward transform: out[j] = Σ in[m] e^{-2πi jm/n}.
  void forward(std::span<const double> in, std::span<Complex> out) const {
    // r2c leaves the input intact; the const_cast only satisfies the C API.
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in.data()), as_fftw(out.data()));
  }

  // Unnormalized inverse. c2r overwrites its input, so `in` is scratch.
  void backward(std::span<Complex> in, std::span<double> out) const {
    fftw_execute_dft_c2r(backward_, as_fftw(in.data()), out.data());
  }

  std::size_t size() const { return n_; }

 private:
  static fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

  std::size_t n_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

inline const RealFft& fft_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace detail

/// Samples f(x_j), x_j = 2πj/n, of a periodic function.
class GridField {
 public:
  explicit GridField(std::size_t n) : values_(checked(n), 0.0) {}
  explicit GridField(std::vector<double> values) : values_(std::move(values)) {
    require_grid_size(values_.size());
  }

  template <class F>
  static GridField sample(std::size_t n, F&& f) {
    GridField out(n);
    for (std::size_t j = 0; j < n; ++j) out.values_[j] = f(x(n, j));
    return out;
  }

  static double x(std::size_t n, std::size_t j) { return kTwoPi * static_cast<double>(j) / static_cast<double>(n); }
  double dx() const { return kTwoPi / static_cast<double>(size()); }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  double mean() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(size());
  }

  GridField& operator+=(const GridField& o) {
    same_size(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] += o.values_[j];
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    same_size(o);
    for (std::size_t j = 0; j < size(); ++j) values_[j] -= o.values_[j];
    return *this;
  }
  GridField& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(double a, GridField f) { return f *= a; }
  friend GridField operator-(GridField f) { return f *= -1.0; }

  void same_size(const GridField& o) const {
    if (o.size() != size()) throw ConfigError("grid size mismatch");
  }

 private:
  static std::size_t checked(std::size_t n) {
    require_grid_size(n);
    return n;
  }

  std::vector<double> values_;
};

/// Half spectrum c_0..c_{n/2} of a real field; c_{-k} = conj(c_k).
class SpectrumField {
 public:
  explicit SpectrumField(std::size_t n) : n_(n), coeffs_((require_grid_size(n), n / 2 + 1)) {}

  std::size_t size() const { return n_; }
  std::size_t nyquist() const { return n_ / 2; }

  /// Coefficient for any k in (-n/2, n/2].
  Complex operator()(long k) const {
    const long half = static_cast<long>(n_ / 2);
    if (k <= -half || k > half) throw std::out_of_range("wavenumber outside the grid");
    return k >= 0 ? coeffs_[static_cast<std::size_t>(k)] : std::conj(coeffs_[static_cast<std::size_t>(-k)]);
  }

  /// Non-negative wavenumbers only.
  Complex& operator[](std::size_t k) { return coeffs_[k]; }
  const Complex& operator[](std::size_t k) const { return coeffs_[k]; }
  std::span<Complex> half() { return coeffs_; }
  std::span<const Complex> half() const { return coeffs_; }

  /// Multiply mode k (k = 0..n/2) by symbol(k).
  template <class Symbol>
  SpectrumField& apply(Symbol&& symbol) {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] *= symbol(k);
    return *this;
  }

 private:
  std::size_t n_;
  std::vector<Complex> coeffs_;
};

inline SpectrumField to_spectrum(const GridField& f) {
  SpectrumField s(f.size());
  detail::fft_for(f.size()).forward(f.values(), s.half());
  const double scale = 1.0 / static_cast<double>(f.size());
  for (auto& c : s.half()) c *= scale;
  return s;
}

inline GridField from_spectrum(const SpectrumField& s) {
  // c2r ignores the imaginary part of c_0 and c_{n/2}; both are real here.
  std::vector<Complex> scratch(s.half().begin(), s.half().end());
  GridField f(s.size());
  detail::fft_for(s.size()).backward(scratch, f.values());
  return f;
}

// ---------------------------------------------------------------------------
// Symbols. Each takes k = 0..n/2 on an n-point grid.

/// -i sgn(k), with sgn(0) = 0 and the Nyquist mode removed.
inline Complex hilbert_symbol(std::size_t k, std::size_t n) {
  if (k == 0 || k == n / 2) return 0.0;
  return {0.0, -1.0};
}

/// (ik)^m; odd m zeroes the Nyquist mode.
inline Complex derivative_symbol(std::size_t k, std::size_t n, unsigned m) {
  if (m % 2 == 1 && k == n / 2) return 0.0;
  const double kk = static_cast<double>(k);
  // i^m cycles through 1, i, -1, -i.
  static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return kIPow[m % 4] * std::pow(kk, static_cast<double>(m));
}

// ---------------------------------------------------------------------------
// Spectral-space operators.

inline SpectrumField hilbert(SpectrumField s) {
  const std::size_t n = s.size();
  return std::move(s.apply([n](std::size_t k) { return hilbert_symbol(k, n); }));
}

inline SpectrumField derivative(SpectrumField s, unsigned m) {
  const std::size_t n = s.size();
  return std::move(s.apply([n, m](std::size_t k) { return derivative_symbol(k, n, m); }));
}

/// |k|^s; even symbol, so the Nyquist mode is kept. s = 0 is the identity.
inline SpectrumField abs_derivative(SpectrumField s, double order) {
  return std::move(s.apply([order](std::size_t k) { return Complex(std::pow(static_cast<double>(k), order)); }));
}

/// Trigonometric interpolation onto m points (zero-padding or truncation).
inline SpectrumField resample(const SpectrumField& s, std::size_t m) {
  SpectrumField out(m);
  const std::size_t n = s.size();
  const std::size_t keep = std::min(n, m) / 2;
  for (std::size_t k = 0; k < keep; ++k) out[k] = s[k];
  if (m > n) {
    // The old Nyquist coefficient stands for a cosine; split it over ±n/2.
    out[n / 2] = 0.5 * s[n / 2].real();
  } else if (m == n) {
    out[n / 2] = s[n / 2];
  } else {
    // Truncation: the new Nyquist mode carries the real part of c_{m/2} and c_{-m/2}.
    out[m / 2] = 2.0 * s[m / 2].real();
  }
  return out;
}

/// Product evaluated on a padded grid of `padded` points, truncated back to
/// the input size with the Nyquist mode dropped. padded >= 3n/2 is alias-free
/// for every retained mode.
inline SpectrumField multiply_padded(const SpectrumField& a, const SpectrumField& b, std::size_t padded) {
  if (a.size() != b.size()) throw ConfigError("grid size mismatch");
  const std::size_t n = a.size();
  const auto& big = detail::fft_for(padded);

  auto to_grid = [&](const SpectrumField& s) {
    std::vector<Complex> work(padded / 2 + 1, 0.0);
    for (std::size_t k = 0; k < n / 2; ++k) work[k] = s[k];
    work[n / 2] = 0.5 * s[n / 2].real();
    std::vector<double> grid(padded);
    big.backward(work, grid);
    return grid;
  };

  auto fa = to_grid(a);
  const auto fb = to_grid(b);
  for (std::size_t j = 0; j < padded; ++j) fa[j] *= fb[j];

  std::vector<Complex> prod(padded / 2 + 1);
  big.forward(fa, prod);
  SpectrumField out(n);
  const double scale = 1.0 / static_cast<double>(padded);
  for (std::size_t k = 0; k < n / 2; ++k) out[k] = prod[k] * scale;
  return out;
}

inline std::size_t dealias_size(std::size_t n) { return 3 * n / 2; }

// ---------------------------------------------------------------------------
// Grid-space operators.

inline GridField hilbert(const GridField& f) { return from_spectrum(hilbert(to_spectrum(f))); }

inline GridField derivative(const GridField& f, unsigned m) { return from_spectrum(derivative(to_spectrum(f), m)); }

inline GridField abs_derivative(const GridField& f, double order) {
  if (order < 0.0) throw ConfigError("abs_derivative order must be non-negative");
  return from_spectrum(abs_derivative(to_spectrum(f), order));
}

inline GridField resample(const GridField& f, std::size_t m) {
  require_grid_size(m);
  return from_spectrum(resample(to_spectrum(f), m));
}

/// Pointwise product with 3/2 zero-padding.
inline GridField multiply_dealiased(const GridField& f, const GridField& g) {
  f.same_size(g);
  return from_spectrum(multiply_padded(to_spectrum(f), to_spectrum(g), dealias_size(f.size())));
}

/// [H, u] f = H[u f] - u H[f].
inline GridField commutator_H(const GridField& u, const GridField& f) {
  return hilbert(multiply_dealiased(u, f)) - multiply_dealiased(u, hilbert(f));
}

/// (Σ_k (1+k²)^s |c_k|²)^{1/2} over k = -n/2+1..n/2. This is the ∫dx
/// normalized norm divided by sqrt(2π).
inline double sobolev_norm(const SpectrumField& s, double order) {
  const std::size_t n = s.size();
  double sum = std::norm(s[0]);
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double kk = static_cast<double>(k);
    sum += 2.0 * std::pow(1.0 + kk * kk, order) * std::norm(s[k]);
  }
  const double nyq = static_cast<double>(n / 2);
  sum += std::pow(1.0 + nyq * nyq, order) * std::norm(s[n / 2]);
  return std::sqrt(sum);
}

inline double sobolev_norm(const GridField& f, double order) {
  if (order < 0.0) throw ConfigError("Sobolev index must be non-negative");
  return sobolev_norm(to_spectrum(f), order);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const GridField& f) { return max_abs(f.values()); }

/// ⟨f, g⟩ = (2π/n) Σ f_j g_j, equal to ∫ f g dx for band-limited products.
inline double inner(const GridField& f, const GridField& g) {
  f.same_size(g);
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g[j];
  return s * f.dx();
}

inline double l2_norm(const GridField& f) { return std::sqrt(inner(f, f)); }

/// Fraction of Σ|c_k|² carried by modes with |k| > n/3.
inline double tail_fraction(const SpectrumField& s) {
  const std::size_t n = s.size();
  double total = std::norm(s[0]);
  double tail = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double e = (k == n / 2 ? 1.0 : 2.0) * std::norm(s[k]);
    total += e;
    if (3 * k > n) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace bh
