#pragma once

// Time integration of u_t + u u_x = H[u] on the torus (and of the pure
// Burgers control with the Hilbert term switched off).
//
// The linear part H (symbol -i sgn k) plus optional hyperviscosity -ν k⁸ is
// propagated exactly by an integrating factor; classical RK4 (Lawson form)
// handles the dealiased nonlinearity -½ ∂ₓ P(u²).

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bh/spectral.hpp"

namespace bh {

struct EvolutionConfig {
  std::size_t n = 256;
  bool hilbert_term = true;
  /// Test hook: drop u u_x, leaving the exactly solvable linear flow.
  bool nonlinear = true;
  double cfl = 0.5;
  double t_max = 1.0;
  double sample_dt = 0.1;
  /// Breakdown when max|u_x| >= M * max|u0_x|.
  double breakdown_slope_factor = 10.0;
  /// Breakdown when the energy fraction above |k| = n/3 exceeds this.
  double tail_fraction_max = 1e-6;
  /// Coefficient of -ν |∂ₓ|⁸; regularization only, 0 in every reference run.
  double hyperviscosity = 0.0;

  void validate() const {
    require_grid_size(n);
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
    if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
    if (!(sample_dt > 0.0)) throw ConfigError("sample_dt must be positive");
    if (!(breakdown_slope_factor > 1.0)) throw ConfigError("breakdown_slope_factor must exceed 1");
    if (!(tail_fraction_max > 0.0 && tail_fraction_max < 1.0)) {
      throw ConfigError("tail_fraction_max must lie in (0, 1)");
    }
    if (!(hyperviscosity >= 0.0)) throw ConfigError("hyperviscosity must be non-negative");
  }
};

enum class BreakdownCause { none, nonfinite, slope, tail };

inline std::string_view to_string(BreakdownCause c) {
  switch (c) {
    case BreakdownCause::nonfinite: return "nonfinite";
    case BreakdownCause::slope: return "slope";
    case BreakdownCause::tail: return "tail";
    case BreakdownCause::none: break;
  }
  return "none";
}

struct BreakdownVerdict {
  bool broke_down = false;
  double t_break = 0.0;
  BreakdownCause cause = BreakdownCause::none;
};

struct SolverState {
  double t = 0.0;
  GridField u;
  double last_dt = 0.0;
  double tail_fraction = 0.0;
};

namespace detail {

using HalfSpectrum = std::vector<Complex>;

inline double tail_fraction(std::span<const Complex> half, std::size_t n) {
  double total = std::norm(half[0]);
  double tail = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double e = (k == n / 2 ? 1.0 : 2.0) * std::norm(half[k]);
    total += e;
    if (3 * k > n) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

inline bool all_finite(std::span<const Complex> half) {
  for (const auto& c : half) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

/// Workspace for grid evaluations and 3/2-padded products of half spectra.
class SpectralWork {
 public:
  explicit SpectralWork(std::size_t n)
      : n_(n),
        padded_(dealias_size(n)),
        fft_(fft_for(n)),
        fft_padded_(fft_for(padded_)),
        pad_a_(padded_ / 2 + 1),
        pad_b_(padded_ / 2 + 1),
        grid_a_(padded_),
        grid_b_(padded_),
        scratch_(n / 2 + 1),
        grid_(n) {}

  std::size_t size() const { return n_; }

  /// out = P(a·b): modes |k| < n/2 of the exact product, Nyquist zero.
  void product(std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> out) {
    to_padded_grid(a, grid_a_);
    if (a.data() == b.data()) {
      for (std::size_t j = 0; j < padded_; ++j) grid_a_[j] *= grid_a_[j];
    } else {
      to_padded_grid(b, grid_b_);
      for (std::size_t j = 0; j < padded_; ++j) grid_a_[j] *= grid_b_[j];
    }
    fft_padded_.forward(grid_a_, pad_a_);
    const double scale = 1.0 / static_cast<double>(padded_);
    for (std::size_t k = 0; k < n_ / 2; ++k) out[k] = pad_a_[k] * scale;
    out[n_ / 2] = 0.0;
  }

  /// Grid values of the field with the given half spectrum.
  std::span<const double> grid(std::span<const Complex> half) {
    std::copy(half.begin(), half.end(), scratch_.begin());
    fft_.backward(scratch_, grid_);
    return grid_;
  }

  /// Grid values of ∂ₓ of the field.
  std::span<const double> grid_derivative(std::span<const Complex> half) {
    for (std::size_t k = 0; k <= n_ / 2; ++k) scratch_[k] = half[k] * derivative_symbol(k, n_, 1);
    fft_.backward(scratch_, grid_);
    return grid_;
  }

 private:
  void to_padded_grid(std::span<const Complex> half, std::vector<double>& out) {
    std::fill(pad_b_.begin(), pad_b_.end(), Complex(0.0));
    for (std::size_t k = 0; k < n_ / 2; ++k) pad_b_[k] = half[k];
    pad_b_[n_ / 2] = 0.5 * half[n_ / 2].real();
    fft_padded_.backward(pad_b_, out);
  }

  std::size_t n_;
  std::size_t padded_;
  const RealFft& fft_;
  const RealFft& fft_padded_;
  HalfSpectrum pad_a_;
  HalfSpectrum pad_b_;
  std::vector<double> grid_a_;
  std::vector<double> grid_b_;
  HalfSpectrum scratch_;
  std::vector<double> grid_;
};

/// Symbol of the linear part: -i sgn(k) (if enabled) - ν k⁸.
struct LinearSymbol {
  std::size_t n;
  bool hilbert_term;
  double hyperviscosity;

  /// e^{L(k) dt} for every k = 0..n/2.
  void exponentials(double dt, std::vector<Complex>& out) const {
    out.resize(n / 2 + 1);
    const Complex phase = hilbert_term ? std::polar(1.0, -dt) : Complex(1.0);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      Complex e = (k == 0 || k == n / 2) ? Complex(1.0) : phase;
      if (hyperviscosity > 0.0) {
        const double k8 = std::pow(static_cast<double>(k), 8.0);
        e *= std::exp(-hyperviscosity * k8 * dt);
      }
      out[k] = e;
    }
  }
};

}  // namespace detail

/// Lawson integrating-factor RK4 for C coupled real fields sharing the
/// linear symbol. The nonlinearity maps the state to its time derivative
/// minus the linear part, in spectral space.
template <std::size_t C>
class IntegratingFactorRK4 {
 public:
  using State = std::array<detail::HalfSpectrum, C>;
  using Nonlinearity = std::function<void(const State&, State&)>;

  IntegratingFactorRK4(detail::LinearSymbol symbol, Nonlinearity nonlinearity)
      : symbol_(symbol), nonlinearity_(std::move(nonlinearity)) {
    const std::size_t h = symbol_.n / 2 + 1;
    for (auto* s : {&k1_, &k2_, &k3_, &k4_, &eu_, &e2u_, &tmp_}) {
      for (auto& c : *s) c.assign(h, Complex(0.0));
    }
  }

  void step(State& u, double dt) {
    symbol_.exponentials(0.5 * dt, half_);
    const std::size_t h = half_.size();
    const double hdt = 0.5 * dt;

    nonlinearity_(u, k1_);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < h; ++k) {
        eu_[c][k] = half_[k] * u[c][k];
        e2u_[c][k] = half_[k] * eu_[c][k];
        tmp_[c][k] = half_[k] * (u[c][k] + hdt * k1_[c][k]);
      }
    }
    nonlinearity_(tmp_, k2_);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < h; ++k) tmp_[c][k] = eu_[c][k] + hdt * k2_[c][k];
    }
    nonlinearity_(tmp_, k3_);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < h; ++k) tmp_[c][k] = e2u_[c][k] + dt * half_[k] * k3_[c][k];
    }
    nonlinearity_(tmp_, k4_);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < h; ++k) {
        const Complex e = half_[k];
        u[c][k] = e2u_[c][k] + (dt / 6.0) * (e * e * k1_[c][k] + 2.0 * e * (k2_[c][k] + k3_[c][k]) + k4_[c][k]);
      }
    }
  }

 private:
  detail::LinearSymbol symbol_;
  Nonlinearity nonlinearity_;
  std::vector<Complex> half_;
  State k1_, k2_, k3_, k4_, eu_, e2u_, tmp_;
};

namespace detail {

inline LinearSymbol linear_symbol(const EvolutionConfig& cfg) {
  return {cfg.n, cfg.hilbert_term, cfg.hyperviscosity};
}

/// -P(u u_x) = -½ ik P(u²), written into out.
inline void burgers_term(SpectralWork& work, std::span<const Complex> u, std::span<Complex> out) {
  work.product(u, u, out);
  const std::size_t n = work.size();
  for (std::size_t k = 0; k <= n / 2; ++k) out[k] *= -0.5 * derivative_symbol(k, n, 1);
}

inline HalfSpectrum half_of(const GridField& f) {
  const auto s = to_spectrum(f);
  return {s.half().begin(), s.half().end()};
}

inline GridField field_of(const HalfSpectrum& half, std::size_t n) {
  SpectrumField s(n);
  std::copy(half.begin(), half.end(), s.half().begin());
  return from_spectrum(s);
}

/// Zero every mode above n/3 (and the Nyquist mode).
inline void truncate_to_third(HalfSpectrum& half, std::size_t n) {
  for (std::size_t k = 0; k < half.size(); ++k) {
    if (3 * k > n || k == n / 2) half[k] = 0.0;
  }
}

inline double cfl_dt(const EvolutionConfig& cfg, double umax) {
  return cfg.cfl * (kTwoPi / static_cast<double>(cfg.n)) / std::max(umax, 1e-8);
}

}  // namespace detail

/// -P(u u_x) + H u - ν |∂ₓ|⁸ u, with the terms enabled by cfg.
inline GridField rhs(const GridField& u, const EvolutionConfig& cfg) {
  const std::size_t n = u.size();
  auto half = detail::half_of(u);
  detail::HalfSpectrum out(half.size(), Complex(0.0));
  if (cfg.nonlinear) {
    detail::SpectralWork work(n);
    detail::burgers_term(work, half, out);
  }
  for (std::size_t k = 0; k <= n / 2; ++k) {
    if (cfg.hilbert_term) out[k] += hilbert_symbol(k, n) * half[k];
    if (cfg.hyperviscosity > 0.0) out[k] -= cfg.hyperviscosity * std::pow(static_cast<double>(k), 8.0) * half[k];
  }
  return detail::field_of(out, n);
}

/// Largest step allowed by the advective CFL condition.
inline double max_stable_dt(const GridField& u, const EvolutionConfig& cfg) {
  return cfg.cfl * u.dx() / std::max(max_abs(u), 1e-8);
}

/// One integrating-factor RK4 step.
inline SolverState step(const SolverState& state, double dt, const EvolutionConfig& cfg) {
  if (!(dt > 0.0)) throw ConfigError("step size must be positive");
  if (cfg.nonlinear && dt > max_stable_dt(state.u, cfg) * (1.0 + 1e-12)) {
    throw ConfigError("step size violates the CFL bound");
  }
  const std::size_t n = state.u.size();
  detail::SpectralWork work(n);
  detail::LinearSymbol symbol{n, cfg.hilbert_term, cfg.hyperviscosity};
  const bool nonlinear = cfg.nonlinear;
  IntegratingFactorRK4<1> rk(symbol, [&](const auto& in, auto& out) {
    if (nonlinear) {
      detail::burgers_term(work, in[0], out[0]);
    } else {
      std::fill(out[0].begin(), out[0].end(), Complex(0.0));
    }
  });
  std::array<detail::HalfSpectrum, 1> u{detail::half_of(state.u)};
  rk.step(u, dt);
  return {state.t + dt, detail::field_of(u[0], n), dt, detail::tail_fraction(u[0], n)};
}

/// Smoothness check; the first cause in the order (nonfinite, slope, tail) wins.
inline BreakdownVerdict detect_breakdown(const SolverState& state, double u0_slope, const EvolutionConfig& cfg) {
  BreakdownVerdict v;
  auto fire = [&](BreakdownCause c) {
    v.broke_down = true;
    v.t_break = state.t;
    v.cause = c;
    return v;
  };
  if (!state.u.finite()) return fire(BreakdownCause::nonfinite);
  const auto s = to_spectrum(state.u);
  if (u0_slope > 0.0 && max_abs(from_spectrum(derivative(s, 1))) >= cfg.breakdown_slope_factor * u0_slope) {
    return fire(BreakdownCause::slope);
  }
  if (tail_fraction(s) > cfg.tail_fraction_max) return fire(BreakdownCause::tail);
  return v;
}

using StateSink = std::function<void(const SolverState&)>;

/// Advances u0 to cfg.t_max or breakdown, passing a state to `sink` at every
/// multiple of sample_dt (and at the breakdown step). u0 is resampled to
/// cfg.n and truncated to |k| <= n/3 first.
class Simulation {
 public:
  Simulation(const GridField& u0, const EvolutionConfig& cfg)
      : cfg_((cfg.validate(), cfg)),
        work_(cfg.n),
        rk_(detail::linear_symbol(cfg), [this](const auto& in, auto& out) { nonlinear(in, out); }) {
    const GridField start = u0.size() == cfg.n ? u0 : resample(u0, cfg.n);
    u_[0] = detail::half_of(start);
    detail::truncate_to_third(u_[0], cfg.n);
    u0_slope_ = max_abs(work_.grid_derivative(u_[0]));
  }
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  double time() const { return t_; }
  double initial_slope() const { return u0_slope_; }
  const BreakdownVerdict& verdict() const { return verdict_; }
  const detail::HalfSpectrum& spectrum() const { return u_[0]; }

  SolverState state() const {
    return {t_, detail::field_of(u_[0], cfg_.n), last_dt_, detail::tail_fraction(u_[0], cfg_.n)};
  }

  /// Advance to min(target, t_max); returns false once broken down or finished.
  bool advance_to(double target) {
    target = std::min(target, cfg_.t_max);
    while (!verdict_.broke_down && t_ < target) {
      const double dt_cfl = detail::cfl_dt(cfg_, max_abs(work_.grid(u_[0])));
      double dt = dt_cfl;
      bool lands = false;
      if (t_ + dt >= target * (1.0 - 1e-14)) {
        dt = target - t_;
        lands = true;
      }
      rk_.step(u_, dt);
      t_ = lands ? target : t_ + dt;
      last_dt_ = dt;
      check();
    }
    return !verdict_.broke_down && t_ < cfg_.t_max;
  }

  std::pair<SolverState, BreakdownVerdict> run(const StateSink& sink) {
    if (sink) sink(state());
    std::size_t sample = 0;
    while (true) {
      ++sample;
      const double next = std::min(static_cast<double>(sample) * cfg_.sample_dt, cfg_.t_max);
      const bool more = advance_to(next);
      if (sink && (verdict_.broke_down || t_ >= next)) sink(state());
      if (!more) break;
    }
    return {state(), verdict_};
  }

 private:
  void nonlinear(const std::array<detail::HalfSpectrum, 1>& in, std::array<detail::HalfSpectrum, 1>& out) {
    if (cfg_.nonlinear) {
      detail::burgers_term(work_, in[0], out[0]);
    } else {
      std::fill(out[0].begin(), out[0].end(), Complex(0.0));
    }
  }

  void check() {
    auto fire = [&](BreakdownCause c) {
      verdict_ = {true, t_, c};
    };
    if (!detail::all_finite(u_[0])) return fire(BreakdownCause::nonfinite);
    if (u0_slope_ > 0.0 && max_abs(work_.grid_derivative(u_[0])) >= cfg_.breakdown_slope_factor * u0_slope_) {
      return fire(BreakdownCause::slope);
    }
    if (detail::tail_fraction(u_[0], cfg_.n) > cfg_.tail_fraction_max) fire(BreakdownCause::tail);
  }

  EvolutionConfig cfg_;
  detail::SpectralWork work_;
  IntegratingFactorRK4<1> rk_;
  std::array<detail::HalfSpectrum, 1> u_;
  double t_ = 0.0;
  double last_dt_ = 0.0;
  double u0_slope_ = 0.0;
  BreakdownVerdict verdict_;
};

inline std::pair<SolverState, BreakdownVerdict> simulate(const GridField& u0, const EvolutionConfig& cfg,
                                                         const StateSink& sink = {}) {
  Simulation sim(u0, cfg);
  return sim.run(sink);
}

}  // namespace bh
