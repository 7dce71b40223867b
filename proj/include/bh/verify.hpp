#pragma once

// Identity and property battery run by `bh verify`. Every check compares two
// independently computed quantities on seeded random fields and reports a
// relative residual.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bh/energies.hpp"
#include "bh/linearized.hpp"
#include "bh/random_fields.hpp"
#include "bh/solver.hpp"

namespace bh {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed() const { return std::isfinite(residual) && residual <= tolerance; }
};

/// Values computed alongside the battery without a pass/fail threshold.
struct RecordedValue {
  std::string name;
  double value = 0.0;
};

struct VerifyReport {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  std::vector<RecordedValue> recorded;

  std::size_t passed() const {
    std::size_t p = 0;
    for (const auto& c : checks) p += c.passed() ? 1 : 0;
    return p;
  }
  bool all_passed() const { return passed() == checks.size(); }
};

namespace detail {

inline double rel(double diff, double scale) { return std::abs(diff) / std::max(std::abs(scale), 1e-300); }

inline double rel_field(const GridField& a, const GridField& b) {
  return l2_norm(a - b) / std::max({l2_norm(a), l2_norm(b), 1e-300});
}

/// Random field with modes first..last only.
inline GridField band_field(RandomFieldSource& src, std::size_t n, std::size_t first, std::size_t last) {
  SpectrumField s = src.spectrum(n, last);
  for (std::size_t k = 0; k < first && k <= n / 2; ++k) s[k] = 0.0;
  return from_spectrum(s);
}

/// Exact product on 4n points, truncated to |k| < n/2.
inline GridField oversampled_product(const GridField& f, const GridField& g) {
  const std::size_t n = f.size();
  const GridField fb = resample(f, 4 * n);
  const GridField gb = resample(g, 4 * n);
  GridField p(4 * n);
  for (std::size_t j = 0; j < 4 * n; ++j) p[j] = fb[j] * gb[j];
  const SpectrumField big = to_spectrum(p);
  SpectrumField out(n);
  for (std::size_t k = 0; k < n / 2; ++k) out[k] = big[k];
  return from_spectrum(out);
}

}  // namespace detail

inline VerifyReport run_identity_suite(std::size_t n = 256, std::uint64_t seed = 7, double tol = 1e-10) {
  require_grid_size(n);
  VerifyReport report{n, seed, {}, {}};
  RandomFieldSource src(seed);
  auto add = [&](std::string name, double residual) { report.checks.push_back({std::move(name), residual, tol}); };

  const GridField f = src.field(n);
  const GridField g = src.field(n);
  const GridField u = src.field(n);

  // Transforms and symbols.
  add("fft_round_trip", detail::rel_field(from_spectrum(to_spectrum(f)), f));
  add("hilbert_squared_is_minus_identity", detail::rel_field(hilbert(hilbert(f)), -f));
  add("hilbert_skew_adjoint", detail::rel(inner(hilbert(f), g) + inner(f, hilbert(g)), l2_norm(f) * l2_norm(g)));
  add("hilbert_orthogonal_to_input", detail::rel(inner(f, hilbert(f)), inner(f, f)));
  add("hilbert_isometry", detail::rel(l2_norm(hilbert(f)) - l2_norm(f), l2_norm(f)));
  add("abs_derivative_is_hilbert_of_derivative", detail::rel_field(abs_derivative(f, 1.0), hilbert(derivative(f, 1))));
  {
    const double s1 = sobolev_norm(f, 1.0);
    const GridField fx = derivative(f, 1);
    add("sobolev_norm_matches_quadrature", detail::rel(kTwoPi * s1 * s1 - inner(f, f) - inner(fx, fx), kTwoPi * s1 * s1));
  }

  // Products and commutators.
  {
    const GridField a = src.field(n, n / 2 - 1);
    const GridField b = src.field(n, n / 2 - 1);
    add("dealiased_product_matches_oversampled", detail::rel_field(multiply_dealiased(a, b), detail::oversampled_product(a, b)));
  }
  {
    const GridField c1 = GridField::sample(n, [](double x) { return std::cos(x); });
    const GridField c5 = GridField::sample(n, [](double x) { return std::cos(5 * x); });
    const GridField s4 = GridField::sample(n, [](double x) { return std::sin(4 * x); });
    add("commutator_vanishes_low_times_high_mode", l2_norm(commutator_H(c1, c5)) / l2_norm(c5));
    add("commutator_high_times_low_mode", detail::rel_field(commutator_H(c5, c1), s4));
    const GridField low = detail::band_field(src, n, 1, n / 16);
    const GridField high = detail::band_field(src, n, n / 16 + 1, n / 8);
    add("commutator_vanishes_separated_bands", l2_norm(commutator_H(low, high)) / (max_abs(low) * l2_norm(high)));
  }

  // Energies.
  {
    const auto q = T_quadratic_form(u, f);
    add("T_quadratic_form", detail::rel(q.lhs - q.rhs, std::max(std::abs(q.lhs), std::abs(q.rhs))));
  }
  for (unsigned k = 1; k <= 3; ++k) {
    const auto e = modified_energy(u, k);
    add("energy_decomposition_k" + std::to_string(k), decomposition_residual(u, k) / e.standard);
  }
  {
    const auto lin = linearized_energy(u, f);
    add("lin_energy_forms_agree", detail::rel(lin.form_a - lin.form_b, lin.l2));
  }
  {
    const GridField c = normal_form(u) - u;
    const GridField c2 = normal_form(2.0 * u) - 2.0 * u;
    add("normal_form_correction_quadratic", detail::rel_field(c2, 4.0 * c));
    const auto e1 = modified_energy(u, 2);
    const auto e2 = modified_energy(2.0 * u, 2);
    add("energy_correction_cubic", detail::rel(e2.correction - 8.0 * e1.correction, 8.0 * e1.correction));
  }

  // Evolution operators.
  {
    EvolutionConfig cfg;
    cfg.n = n;
    add("linearized_rhs_tracks_derivative",
        detail::rel_field(linearized_rhs(u, derivative(u, 1)), derivative(rhs(u, cfg), 1)));
  }

  for (unsigned k = 2; k <= 3; ++k) {
    report.recorded.push_back({"leading_term_ratio_k" + std::to_string(k), leading_term_ratio(u, k)});
  }
  return report;
}

}  // namespace bh
