#pragma once

// Orchestrated studies: lifespan sweeps with power-law fits, energy-drift
// scaling, difference stability and the random-field ratio statistics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bh/energies.hpp"
#include "bh/linearized.hpp"
#include "bh/random_fields.hpp"
#include "bh/solver.hpp"

namespace bh {

// ---------------------------------------------------------------------------
// Initial shapes

struct Profile {
  std::string name;
  std::function<double(double)> shape;

  GridField sample(std::size_t n, double amplitude = 1.0) const {
    return GridField::sample(n, [&](double x) { return amplitude * shape(x); });
  }
};

inline const std::vector<Profile>& profiles() {
  static const std::vector<Profile> all = {
      {"sin", [](double x) { return std::sin(x); }},
      {"sin+sin2", [](double x) { return std::sin(x) + 0.5 * std::sin(2.0 * x); }},
      {"cos2", [](double x) { return std::cos(2.0 * x); }},
      {"cos+cos2", [](double x) { return std::cos(x) + std::cos(2.0 * x); }},
  };
  return all;
}

/// Seeded random band-limited shape (modes 1..max_mode, |c_k| ∝ (1+k²)^{-1})
/// scaled to the H² norm of sin x, so an amplitude ε means the same data
/// size for every profile. Evaluated by direct summation, independent of the
/// grid it is later sampled on.
inline Profile random_profile(std::uint64_t seed, std::size_t max_mode = 16) {
  std::size_t n = 16;
  while (n < 4 * max_mode) n *= 2;
  const auto s = RandomFieldSource(seed).spectrum(n, max_mode);
  std::vector<Complex> c(s.half().begin(), s.half().begin() + static_cast<std::ptrdiff_t>(max_mode + 1));
  // ‖sin‖_{H²} = sqrt(2·(1+1)²·¼) = sqrt(2).
  const double scale = std::sqrt(2.0) / sobolev_norm(s, 2.0);
  for (auto& ck : c) ck *= scale;
  auto eval = [c](double x) {
    double v = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) v += 2.0 * std::real(c[k] * std::polar(1.0, static_cast<double>(k) * x));
    return v;
  };
  return {"random:" + std::to_string(seed), eval};
}

/// Named shapes, plus "random:<seed>" for a seeded random profile.
inline Profile profile_by_name(const std::string& name) {
  for (const auto& p : profiles()) {
    if (p.name == name) return p;
  }
  if (name.rfind("random:", 0) == 0) {
    try {
      return random_profile(std::stoull(name.substr(7)));
    } catch (const std::logic_error&) {
    }
  }
  throw ConfigError("unknown profile '" + name + "'");
}

// ---------------------------------------------------------------------------
// Power laws

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (log x, log y).
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) throw ConfigError("power-law fit needs at least two points");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : pairs) {
    if (!(x > 0.0) || !(y > 0.0)) throw ConfigError("power-law fit needs positive data");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double m = static_cast<double>(pairs.size());
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : pairs) {
    const double dx = std::log(x) - mx;
    const double dy = std::log(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ConfigError("power-law fit needs distinct x values");
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (const auto& [x, y] : pairs) {
    const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

namespace detail {

/// Runs task(i) for i in [0, count) on up to `jobs` threads.
inline void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) task(i);
    });
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lifespan sweep

struct SweepEntry {
  double eps = 0.0;
  std::size_t n = 0;
  double t_max = 0.0;
  BreakdownVerdict verdict;      // at n
  BreakdownVerdict verdict_2n;   // at 2n (broke_down false if not run)

  bool censored() const { return !verdict.broke_down; }
  bool censored_2n() const { return !verdict_2n.broke_down; }
};

struct SweepOptions {
  /// Run horizon: t_max = horizon/ε² with the Hilbert term, horizon/ε without.
  double horizon = 10.0;
  bool second_resolution = true;
  unsigned jobs = 1;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::optional<PowerLawFit> fit;     ///< over uncensored entries at n
  std::optional<PowerLawFit> fit_2n;  ///< over uncensored entries at 2n
  std::vector<std::string> warnings;
};

/// Fit over the uncensored entries, or nothing if fewer than three remain.
inline std::optional<PowerLawFit> fit_lifespans(const std::vector<SweepEntry>& entries, bool doubled) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& e : entries) {
    const auto& v = doubled ? e.verdict_2n : e.verdict;
    if (v.broke_down && v.t_break > 0.0) pairs.emplace_back(e.eps, v.t_break);
  }
  if (pairs.size() < 3) return std::nullopt;
  return fit_power_law(pairs);
}

inline SweepResult lifespan_sweep(std::vector<double> eps_list, const Profile& profile,
                                  const EvolutionConfig& cfg_template, const SweepOptions& options = {}) {
  cfg_template.validate();
  for (double e : eps_list) {
    if (!(e > 0.0)) throw ConfigError("sweep amplitudes must be positive");
  }
  std::sort(eps_list.begin(), eps_list.end());

  SweepResult result;
  result.entries.resize(eps_list.size());
  const std::size_t runs_per_eps = options.second_resolution ? 2 : 1;
  detail::parallel_for(eps_list.size() * runs_per_eps, options.jobs, [&](std::size_t task) {
    const std::size_t i = task / runs_per_eps;
    const bool doubled = task % runs_per_eps == 1;
    const double eps = eps_list[i];
    EvolutionConfig cfg = cfg_template;
    cfg.t_max = options.horizon / (cfg.hilbert_term ? eps * eps : eps);
    cfg.sample_dt = cfg.t_max;
    if (doubled) cfg.n *= 2;
    const auto [final_state, verdict] = simulate(profile.sample(cfg.n, eps), cfg);
    auto& entry = result.entries[i];
    if (doubled) {
      entry.verdict_2n = verdict;
    } else {
      entry.eps = eps;
      entry.n = cfg.n;
      entry.t_max = cfg.t_max;
      entry.verdict = verdict;
    }
  });

  for (const auto& e : result.entries) {
    if (e.censored()) {
      result.warnings.push_back("eps=" + std::to_string(e.eps) + ": no breakdown before t_max=" +
                                std::to_string(e.t_max) + "; censored");
    }
  }
  result.fit = fit_lifespans(result.entries, false);
  if (options.second_resolution) result.fit_2n = fit_lifespans(result.entries, true);
  if (!result.fit) result.warnings.emplace_back("fewer than 3 uncensored entries; fit unavailable");
  return result;
}

// ---------------------------------------------------------------------------
// Energy drift scaling

enum class DriftQuantity { modified_energy, standard_energy, lin_energy, lin_l2 };

inline std::string_view to_string(DriftQuantity q) {
  switch (q) {
    case DriftQuantity::modified_energy: return "modified_energy_drift";
    case DriftQuantity::standard_energy: return "standard_energy_drift";
    case DriftQuantity::lin_energy: return "lin_energy_drift";
    case DriftQuantity::lin_l2: return "lin_l2_drift";
  }
  return "";
}

/// Expected amplitude exponent of each drift rate.
inline double expected_exponent(DriftQuantity q) {
  switch (q) {
    case DriftQuantity::modified_energy: return 4.0;
    case DriftQuantity::standard_energy: return 3.0;
    case DriftQuantity::lin_energy: return 2.0;
    case DriftQuantity::lin_l2: return 1.0;
  }
  return 0.0;
}

struct ScalingStudy {
  DriftQuantity quantity = DriftQuantity::modified_energy;
  std::vector<std::pair<double, double>> pairs;  ///< (ε, drift rate)
  std::optional<PowerLawFit> fit;
  double expected = 0.0;
  double tolerance = 0.4;
  std::vector<std::string> warnings;

  bool available() const { return fit.has_value(); }
  bool within_band() const { return fit && std::abs(fit->slope - expected) <= tolerance; }
};

struct DriftOptions {
  unsigned k = 2;
  double window = 1.0;
  double sample_dt = 0.01;
  /// Shape of the perturbation w0 for the linearized quantities.
  std::string perturbation = "cos+cos2";
};

/// max over interior samples of the centered difference |(y_{j+1} - y_{j-1}) / 2h|.
inline double max_centered_rate(const std::vector<double>& y, double h) {
  double rate = 0.0;
  for (std::size_t j = 1; j + 1 < y.size(); ++j) rate = std::max(rate, std::abs(y[j + 1] - y[j - 1]) / (2.0 * h));
  return rate;
}

inline ScalingStudy energy_drift_study(const std::vector<double>& eps_list, const Profile& profile,
                                       DriftQuantity quantity, const EvolutionConfig& cfg_template,
                                       const DriftOptions& options = {}) {
  ScalingStudy study;
  study.quantity = quantity;
  study.expected = expected_exponent(quantity);
  const bool linearized = quantity == DriftQuantity::lin_energy || quantity == DriftQuantity::lin_l2;

  for (double eps : eps_list) {
    EvolutionConfig cfg = cfg_template;
    cfg.t_max = options.window;
    cfg.sample_dt = options.sample_dt;
    std::vector<double> series;
    BreakdownVerdict verdict;
    const GridField u0 = profile.sample(cfg.n, eps);
    if (linearized) {
      const GridField w0 = profile_by_name(options.perturbation).sample(cfg.n);
      verdict = cosimulate(u0, w0, cfg, [&](const LinearizedState& s) {
        const auto r = linearized_energy(s.u, s.w);
        series.push_back(quantity == DriftQuantity::lin_energy ? r.form_a : r.l2);
      }).second;
    } else {
      verdict = simulate(u0, cfg, [&](const SolverState& s) {
        series.push_back(quantity == DriftQuantity::modified_energy ? modified_energy(s.u, options.k).modified
                                                                   : standard_energy(s.u, options.k));
      }).second;
    }
    if (verdict.broke_down) {
      study.warnings.push_back("eps=" + std::to_string(eps) + ": breakdown inside the window; excluded");
      continue;
    }
    const double rate = max_centered_rate(series, options.sample_dt);
    if (rate > 0.0) study.pairs.emplace_back(eps, rate);
  }
  if (study.pairs.size() >= 2) {
    study.fit = fit_power_law(study.pairs);
  } else {
    study.warnings.emplace_back("fewer than 2 usable amplitudes; study unavailable");
  }
  return study;
}

// ---------------------------------------------------------------------------
// Difference stability

struct StabilitySample {
  double t = 0.0;
  double w_l2 = 0.0;
  LinEnergyReport lin;
};

struct StabilityReport {
  double eps = 0.0;
  double max_growth = 1.0;     ///< max_t ‖w(t)‖ / ‖w(0)‖
  double max_lin_drift = 0.0;  ///< max_t |E_lin(t) - E_lin(0)| / |E_lin(0)|
  double t_end = 0.0;
  BreakdownVerdict verdict;
  std::vector<StabilitySample> samples;
};

/// Cosimulates (u, w) to t = 1/ε² (unless cfg.t_max is smaller) and records
/// the growth of ‖w‖.
inline StabilityReport stability_study(const GridField& u0, const GridField& w0, double eps,
                                       EvolutionConfig cfg) {
  if (eps > 0.0) cfg.t_max = std::min(cfg.t_max, 1.0 / (eps * eps));
  StabilityReport report;
  report.eps = eps;
  double w0_norm = -1.0;
  double e0 = 0.0;
  auto [final_state, verdict] = cosimulate(u0, w0, cfg, [&](const LinearizedState& s) {
    StabilitySample sample{s.t, l2_norm(s.w), linearized_energy(s.u, s.w)};
    if (w0_norm < 0.0) {
      w0_norm = sample.w_l2;
      e0 = sample.lin.form_a;
    }
    if (w0_norm > 0.0) report.max_growth = std::max(report.max_growth, sample.w_l2 / w0_norm);
    if (e0 != 0.0) report.max_lin_drift = std::max(report.max_lin_drift, std::abs(sample.lin.form_a - e0) / std::abs(e0));
    report.samples.push_back(sample);
  });
  report.t_end = final_state.t;
  report.verdict = verdict;
  return report;
}

// ---------------------------------------------------------------------------
// Random-field ratio statistics (constants are measured, not known)

struct RatioStats {
  double max = 0.0;
  double mean = 0.0;
  std::size_t samples = 0;
};

namespace detail {
template <class F>
RatioStats collect(std::size_t samples, F&& ratio) {
  RatioStats s;
  for (std::size_t i = 0; i < samples; ++i) {
    const double r = ratio();
    s.max = std::max(s.max, r);
    s.mean += r;
  }
  s.samples = samples;
  if (samples > 0) s.mean /= static_cast<double>(samples);
  return s;
}
}  // namespace detail

/// ‖[H,u] ∂ₓ^k u_x‖ / (‖u_x‖_∞ ‖∂ₓ^k u‖) over random fields.
inline RatioStats commutator_ratio_stats(std::size_t n, std::size_t samples, std::uint64_t seed, unsigned k = 2) {
  RandomFieldSource source(seed);
  return detail::collect(samples, [&] {
    const GridField u = source.field(n);
    const GridField ux = derivative(u, 1);
    const GridField dku = derivative(u, k);
    return l2_norm(commutator_H(u, derivative(ux, k))) / (max_abs(ux) * l2_norm(dku));
  });
}

/// (‖[H,u_x]u_x‖_∞ + ‖[H,u]u_xx‖_∞) / ‖u_x‖²_{H^{1/2+δ}} over random fields.
inline RatioStats pointwise_ratio_stats(std::size_t n, std::size_t samples, std::uint64_t seed, double delta = 0.1) {
  RandomFieldSource source(seed);
  return detail::collect(samples, [&] {
    const GridField u = source.field(n);
    const GridField ux = derivative(u, 1);
    const GridField uxx = derivative(u, 2);
    const double num = max_abs(commutator_H(ux, ux)) + max_abs(commutator_H(u, uxx));
    const double den = std::pow(sobolev_norm(ux, 0.5 + delta), 2);
    return num / den;
  });
}

/// max |E_k/standard - 1| / ‖Hu_x‖_∞ over random fields scaled so that
/// ‖Hu_x‖_∞ is uniform in [0.01, 0.3].
inline RatioStats equivalence_constant(std::size_t n, std::size_t samples, std::uint64_t seed, unsigned k) {
  RandomFieldSource source(seed);
  return detail::collect(samples, [&] {
    GridField u = source.field(n);
    u *= source.uniform(0.01, 0.3) / max_abs(hilbert(derivative(u, 1)));
    const auto r = modified_energy(u, k);
    return std::abs(r.ratio - 1.0) / r.hux_inf;
  });
}

/// max |E_lin/‖w‖² - 1| / ‖Hu_x‖_∞ over random pairs, same scaling as above.
inline RatioStats lin_equivalence_constant(std::size_t n, std::size_t samples, std::uint64_t seed) {
  RandomFieldSource source(seed);
  return detail::collect(samples, [&] {
    GridField u = source.field(n);
    const GridField w = source.field(n);
    u *= source.uniform(0.01, 0.3) / max_abs(hilbert(derivative(u, 1)));
    const auto r = linearized_energy(u, w);
    return std::abs(r.form_a / r.l2 - 1.0) / max_abs(hilbert(derivative(u, 1)));
  });
}

}  // namespace bh
