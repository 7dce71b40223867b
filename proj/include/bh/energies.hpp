#pragma once

// Normal form v = u + H[Hu·Hu_x], the operator T_u f = H[Hu·Hf_x], and the
// standard / modified H^k energies
//
//   E_k(u) = ½‖∂ₓ^k u‖² + ⟨∂ₓ^k u, ∂ₓ^k H[Hu·Hu_x]⟩.
//
// Inner products are ∫dx-normalized. Quantities involving the quadratic
// correction are evaluated on a 2n grid so that the product Hu·Hu_x is kept
// in full and the algebraic identities hold to rounding.

#include <cmath>

#include "bh/spectral.hpp"

namespace bh {

struct EnergyReport {
  unsigned k = 0;
  double standard = 0.0;
  double modified = 0.0;
  double correction = 0.0;
  double ratio = 1.0;
  double hux_inf = 0.0;
};

namespace detail {

inline void require_order(const GridField& u, unsigned k) {
  if (k > u.size() / 4) throw ConfigError("derivative order exceeds n/4");
}

/// Everything E_k needs, evaluated on the doubled grid.
struct CorrectionParts {
  GridField u;           // u on 2n points
  GridField correction;  // H[Hu·Hu_x] on 2n points, untruncated
  GridField hux;         // H u_x on 2n points
};

inline CorrectionParts correction_parts(const GridField& u_in) {
  GridField u = resample(u_in, 2 * u_in.size());
  const auto s = to_spectrum(u);
  GridField hu = from_spectrum(hilbert(s));
  GridField hux = from_spectrum(derivative(hilbert(s), 1));
  GridField c = hilbert(multiply_dealiased(hu, hux));
  return {std::move(u), std::move(c), std::move(hux)};
}

}  // namespace detail

/// T_u f = H[Hu · H f_x], truncated to the input grid.
inline GridField apply_T(const GridField& u, const GridField& f) {
  return hilbert(multiply_dealiased(hilbert(u), hilbert(derivative(f, 1))));
}

/// v = u + H[Hu·Hu_x], truncated to the input grid.
inline GridField normal_form(const GridField& u) {
  return u + hilbert(multiply_dealiased(hilbert(u), hilbert(derivative(u, 1))));
}

/// ½‖∂ₓ^k u‖²_{L²}.
inline double standard_energy(const GridField& u, unsigned k) {
  detail::require_order(u, k);
  const GridField d = derivative(u, k);
  return 0.5 * inner(d, d);
}

inline EnergyReport modified_energy(const GridField& u, unsigned k) {
  detail::require_order(u, k);
  const auto parts = detail::correction_parts(u);
  EnergyReport r;
  r.k = k;
  const GridField dku = derivative(parts.u, k);
  r.standard = 0.5 * inner(dku, dku);
  r.correction = inner(dku, derivative(parts.correction, k));
  r.modified = r.standard + r.correction;
  r.ratio = r.standard > 0.0 ? r.modified / r.standard : 1.0;
  r.hux_inf = max_abs(parts.hux);
  return r;
}

/// |½‖∂ₓ^k v‖² - E_k(u) - ½‖∂ₓ^k H[Hu·Hu_x]‖²|, all on the doubled grid.
inline double decomposition_residual(const GridField& u, unsigned k) {
  detail::require_order(u, k);
  const auto parts = detail::correction_parts(u);
  const GridField dku = derivative(parts.u, k);
  const GridField dkc = derivative(parts.correction, k);
  const GridField dkv = dku + dkc;
  const double e_k = 0.5 * inner(dku, dku) + inner(dku, dkc);
  return std::abs(0.5 * inner(dkv, dkv) - e_k - 0.5 * inner(dkc, dkc));
}

/// Both sides of ⟨f, T_u f⟩ = ½∫ Hu_x (Hf)² dx, on the doubled grid.
struct QuadraticFormSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline QuadraticFormSides T_quadratic_form(const GridField& u_in, const GridField& f_in) {
  u_in.same_size(f_in);
  const std::size_t m = 2 * u_in.size();
  const GridField u = resample(u_in, m);
  const GridField f = resample(f_in, m);
  const GridField hf = hilbert(f);
  const GridField hux = hilbert(derivative(u, 1));
  const GridField hf2 = multiply_dealiased(hf, hf);
  return {inner(f, apply_T(u, f)), 0.5 * inner(hux, hf2)};
}

/// correction / ((k+½)⟨Hu_x, (∂ₓ^k Hu)²⟩): how much of the cubic correction
/// the leading term accounts for. Recorded only; lower-order terms are not
/// small in general.
inline double leading_term_ratio(const GridField& u, unsigned k) {
  const auto parts = detail::correction_parts(u);
  const GridField dku = derivative(parts.u, k);
  const double correction = inner(dku, derivative(parts.correction, k));
  const GridField dkhu = hilbert(dku);
  const double lead = (k + 0.5) * inner(parts.hux, multiply_dealiased(dkhu, dkhu));
  return lead != 0.0 ? correction / lead : 0.0;
}

}  // namespace bh
