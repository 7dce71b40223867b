#pragma once

// Linearization w_t + w u_x + u w_x = H w along a background solution u,
// its normal form q = w + |∂ₓ|(Hw·Hu) and the modified energy
//
//   E_lin(w) = ∫ w² + 2 |∂ₓ|w · Hu · Hw dx = ∫ w² - |∂ₓ|u · (Hw)² dx.

#include <array>
#include <cmath>
#include <functional>
#include <utility>

#include "bh/solver.hpp"

namespace bh {

struct LinEnergyReport {
  double form_a = 0.0;  ///< ∫ w² + 2|∂ₓ|w·Hu·Hw
  double form_b = 0.0;  ///< ∫ w² - |∂ₓ|u·(Hw)²
  double l2 = 0.0;      ///< ‖w‖²

  /// The two forms are equal by an integration by parts.
  bool consistent(double rel_tol = 1e-10) const {
    return std::abs(form_a - form_b) <= rel_tol * std::max(l2, std::numeric_limits<double>::min());
  }
};

struct LinearizedState {
  double t = 0.0;
  GridField u;
  GridField w;
};

inline GridField linearized_rhs(const GridField& u, const GridField& w) {
  u.same_size(w);
  return hilbert(w) - multiply_dealiased(w, derivative(u, 1)) - multiply_dealiased(u, derivative(w, 1));
}

inline GridField linearized_normal_form(const GridField& u, const GridField& w) {
  u.same_size(w);
  return w + abs_derivative(multiply_dealiased(hilbert(w), hilbert(u)), 1.0);
}

/// Both forms of E_lin, evaluated on the doubled grid.
inline LinEnergyReport linearized_energy(const GridField& u_in, const GridField& w_in) {
  u_in.same_size(w_in);
  const std::size_t m = 2 * u_in.size();
  const GridField u = resample(u_in, m);
  const GridField w = resample(w_in, m);
  const GridField hw = hilbert(w);
  LinEnergyReport r;
  r.l2 = inner(w, w);
  r.form_a = r.l2 + 2.0 * inner(abs_derivative(w, 1.0), multiply_dealiased(hilbert(u), hw));
  r.form_b = r.l2 - inner(abs_derivative(u, 1.0), multiply_dealiased(hw, hw));
  return r;
}

using LinearizedSink = std::function<void(const LinearizedState&)>;

/// Joint evolution of (u, w). Both share the linear part, so one
/// integrating-factor RK4 advances the pair; the step size follows the
/// background CFL condition.
class CoSimulation {
 public:
  CoSimulation(const GridField& u0, const GridField& w0, const EvolutionConfig& cfg)
      : cfg_((cfg.validate(), cfg)),
        work_(cfg.n),
        rk_(detail::linear_symbol(cfg), [this](const auto& in, auto& out) { nonlinear(in, out); }) {
    auto prepare = [&](const GridField& f) {
      auto half = detail::half_of(f.size() == cfg.n ? f : resample(f, cfg.n));
      detail::truncate_to_third(half, cfg.n);
      return half;
    };
    state_[0] = prepare(u0);
    state_[1] = prepare(w0);
    u0_slope_ = max_abs(work_.grid_derivative(state_[0]));
  }
  CoSimulation(const CoSimulation&) = delete;
  CoSimulation& operator=(const CoSimulation&) = delete;

  LinearizedState state() const {
    return {t_, detail::field_of(state_[0], cfg_.n), detail::field_of(state_[1], cfg_.n)};
  }
  const BreakdownVerdict& verdict() const { return verdict_; }
  double last_dt() const { return last_dt_; }

  std::pair<LinearizedState, BreakdownVerdict> run(const LinearizedSink& sink) {
    if (sink) sink(state());
    std::size_t sample = 0;
    while (!verdict_.broke_down && t_ < cfg_.t_max) {
      ++sample;
      const double next = std::min(static_cast<double>(sample) * cfg_.sample_dt, cfg_.t_max);
      while (!verdict_.broke_down && t_ < next) {
        double dt = detail::cfl_dt(cfg_, max_abs(work_.grid(state_[0])));
        bool lands = false;
        if (t_ + dt >= next * (1.0 - 1e-14)) {
          dt = next - t_;
          lands = true;
        }
        rk_.step(state_, dt);
        t_ = lands ? next : t_ + dt;
        last_dt_ = dt;
        check();
      }
      if (sink) sink(state());
    }
    return {state(), verdict_};
  }

 private:
  void nonlinear(const std::array<detail::HalfSpectrum, 2>& in, std::array<detail::HalfSpectrum, 2>& out) {
    if (!cfg_.nonlinear) {
      for (auto& o : out) std::fill(o.begin(), o.end(), Complex(0.0));
      return;
    }
    detail::burgers_term(work_, in[0], out[0]);
    // w u_x + u w_x = (u w)_x.
    work_.product(in[0], in[1], out[1]);
    const std::size_t n = cfg_.n;
    for (std::size_t k = 0; k <= n / 2; ++k) out[1][k] *= -derivative_symbol(k, n, 1);
  }

  void check() {
    auto fire = [&](BreakdownCause c) { verdict_ = {true, t_, c}; };
    if (!detail::all_finite(state_[0]) || !detail::all_finite(state_[1])) return fire(BreakdownCause::nonfinite);
    if (u0_slope_ > 0.0 && max_abs(work_.grid_derivative(state_[0])) >= cfg_.breakdown_slope_factor * u0_slope_) {
      return fire(BreakdownCause::slope);
    }
    if (detail::tail_fraction(state_[0], cfg_.n) > cfg_.tail_fraction_max) fire(BreakdownCause::tail);
  }

  EvolutionConfig cfg_;
  detail::SpectralWork work_;
  IntegratingFactorRK4<2> rk_;
  std::array<detail::HalfSpectrum, 2> state_;
  double t_ = 0.0;
  double last_dt_ = 0.0;
  double u0_slope_ = 0.0;
  BreakdownVerdict verdict_;
};

inline std::pair<LinearizedState, BreakdownVerdict> cosimulate(const GridField& u0, const GridField& w0,
                                                               const EvolutionConfig& cfg,
                                                               const LinearizedSink& sink = {}) {
  CoSimulation sim(u0, w0, cfg);
  return sim.run(sink);
}

}  // namespace bh
