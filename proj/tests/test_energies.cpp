#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bh/energies.hpp"
#include "bh/random_fields.hpp"

using namespace bh;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

GridField sample(std::size_t n, double (*f)(double)) { return GridField::sample(n, f); }

double sup_diff(const GridField& a, const GridField& b) { return max_abs(a - b); }

/// E_k by direct pointwise products on a 4n grid.
double modified_energy_oracle(const GridField& u, unsigned k) {
  const std::size_t m = 4 * u.size();
  const GridField ub = resample(u, m);
  const GridField hu = hilbert(ub);
  const GridField hux = hilbert(derivative(ub, 1));
  GridField prod(m);
  for (std::size_t j = 0; j < m; ++j) prod[j] = hu[j] * hux[j];
  const GridField dku = derivative(ub, k);
  const GridField dkc = derivative(hilbert(prod), k);
  double std_part = 0.0;
  double corr = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    std_part += dku[j] * dku[j];
    corr += dku[j] * dkc[j];
  }
  const double dx = kTwoPi / static_cast<double>(m);
  return 0.5 * std_part * dx + corr * dx;
}

}  // namespace

TEST_CASE("apply_T examples") {
  const std::size_t n = 64;
  RandomFieldSource src(31);
  const GridField u = src.field(n);
  GridField one(n);
  for (std::size_t j = 0; j < n; ++j) one[j] = 1.0;
  CHECK(max_abs(apply_T(u, one)) == 0.0);
  const GridField c = sample(n, [](double x) { return std::cos(x); });
  CHECK(sup_diff(apply_T(c, c), GridField::sample(n, [](double x) { return -0.5 * std::cos(2 * x); })) <= 1e-13);
}

TEST_CASE("quadratic form of T matches the quadrature formula") {
  RandomFieldSource src(32);
  for (int trial = 0; trial < 20; ++trial) {
    const GridField u = src.field(128);
    const GridField f = src.field(128);
    const auto q = T_quadratic_form(u, f);
    CHECK(std::abs(q.lhs - q.rhs) <= 1e-11 * std::max(std::abs(q.rhs), 1e-300));
    // Independent right side: ½∫ Hu_x (Hf)² dx on 4n points.
    const GridField hf = resample(hilbert(f), 512);
    const GridField hux = resample(hilbert(derivative(u, 1)), 512);
    double oracle = 0.0;
    for (std::size_t j = 0; j < 512; ++j) oracle += hux[j] * hf[j] * hf[j];
    oracle *= 0.5 * kTwoPi / 512.0;
    CHECK(q.rhs == Approx(oracle).epsilon(1e-11));
  }
}

TEST_CASE("normal form examples") {
  const std::size_t n = 64;
  CHECK(max_abs(normal_form(GridField(n))) == 0.0);
  const double a = 0.3;
  const GridField u = GridField::sample(n, [a](double x) { return a * std::cos(x); });
  const GridField expect = GridField::sample(n, [a](double x) { return a * std::cos(x) - 0.5 * a * a * std::cos(2 * x); });
  CHECK(sup_diff(normal_form(u), expect) <= 1e-14);

  RandomFieldSource src(33);
  const GridField r = src.field(n);
  const double eps = 0.37;
  const GridField lhs = normal_form(eps * r) - eps * r;
  const GridField rhs = eps * eps * (normal_form(r) - r);
  CHECK(sup_diff(lhs, rhs) <= 1e-12 * max_abs(rhs));
}

TEST_CASE("normal form correction is quadratically small") {
  RandomFieldSource src(34);
  const GridField u = src.field(128);
  double worst = 0.0;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const GridField v = normal_form(eps * u);
    const double ratio = l2_norm(v - eps * u) / (l2_norm(eps * u) * max_abs(derivative(eps * u, 1)));
    worst = std::max(worst, ratio);
  }
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}

TEST_CASE("standard energy examples") {
  const std::size_t n = 64;
  const double a = 0.7;
  const GridField u = GridField::sample(n, [a](double x) { return a * std::cos(x); });
  CHECK(standard_energy(u, 1) == Approx(a * a * kPi / 2).epsilon(1e-14));
  GridField c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = 4.0;
  CHECK(standard_energy(c, 1) == 0.0);
  CHECK(standard_energy(c, 3) == 0.0);

  RandomFieldSource src(35);
  const GridField r = src.field(n);
  for (unsigned k : {0u, 1u, 2u, 3u}) {
    const auto s = to_spectrum(r);
    double parseval = 0.0;
    for (std::size_t m = 1; m < n / 2; ++m) parseval += 2.0 * std::pow(double(m), 2.0 * k) * std::norm(s[m]);
    CHECK(standard_energy(r, k) == Approx(kTwoPi * parseval / 2.0).epsilon(1e-11));
  }
}

TEST_CASE("energy order is limited to n/4") {
  GridField u(16);
  CHECK_NOTHROW(standard_energy(u, 4));
  CHECK_THROWS_AS(standard_energy(u, 5), ConfigError);
  CHECK_THROWS_AS(modified_energy(u, 5), ConfigError);
  CHECK_THROWS_AS(decomposition_residual(u, 5), ConfigError);
}

TEST_CASE("modified energy examples") {
  const std::size_t n = 64;
  const auto zero = modified_energy(GridField(n), 2);
  CHECK(zero.standard == 0.0);
  CHECK(zero.modified == 0.0);
  CHECK(zero.correction == 0.0);
  CHECK(zero.ratio == 1.0);
  CHECK(zero.hux_inf == 0.0);

  const double a = 0.2;
  const GridField u = GridField::sample(n, [a](double x) { return a * std::cos(x); });
  const auto r = modified_energy(u, 1);
  CHECK(r.k == 1);
  CHECK(r.modified == Approx(a * a * kPi / 2).epsilon(1e-13));
  CHECK(std::abs(r.correction) <= 1e-15);
  CHECK(r.hux_inf == Approx(a).epsilon(1e-14));

  const GridField v = GridField::sample(n, [](double x) { return 0.1 * std::cos(x) + 0.05 * std::cos(2 * x); });
  const auto e = modified_energy(v, 2);
  CHECK(e.modified == Approx(modified_energy_oracle(v, 2)).epsilon(1e-10));
  CHECK(e.correction != 0.0);
  CHECK(e.ratio == Approx(e.modified / e.standard).epsilon(1e-15));
}

TEST_CASE("modified energy matches the oversampled oracle on random fields") {
  RandomFieldSource src(36);
  for (unsigned k : {1u, 2u, 3u}) {
    const GridField u = 0.2 * src.field(128);
    CHECK(modified_energy(u, k).modified == Approx(modified_energy_oracle(u, k)).epsilon(1e-10));
  }
}

TEST_CASE("decomposition residual vanishes") {
  CHECK(decomposition_residual(GridField(64), 2) == 0.0);
  for (int m : {1, 2, 5}) {
    const GridField u = GridField::sample(64, [m](double x) { return 0.3 * std::sin(m * x); });
    CHECK(decomposition_residual(u, 1) <= 1e-11);
  }
  RandomFieldSource src(37);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const GridField u = src.field(128);
    const double scale = std::pow(sobolev_norm(u, 2.0), 2) * kTwoPi;
    worst = std::max(worst, decomposition_residual(u, 2) / scale);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("correction is cubic in the amplitude") {
  RandomFieldSource src(38);
  const GridField u = src.field(128);
  for (unsigned k : {1u, 2u, 3u}) {
    const double c1 = modified_energy(u, k).correction;
    const double c2 = modified_energy(0.1 * u, k).correction;
    CHECK(c2 == Approx(1e-3 * c1).epsilon(1e-12));
  }
}

TEST_CASE("modified and standard energies are equivalent for small slopes") {
  RandomFieldSource src(39);
  for (int i = 0; i < 50; ++i) {
    GridField u = src.field(128);
    u *= 0.05 / max_abs(hilbert(derivative(u, 1)));
    for (unsigned k : {1u, 2u, 3u}) {
      const auto r = modified_energy(u, k);
      CHECK(std::abs(r.ratio - 1.0) <= 5.0 * r.hux_inf);
    }
  }
}

TEST_CASE("leading term ratio is finite and reported") {
  RandomFieldSource src(40);
  const GridField u = src.field(128);
  for (unsigned k : {2u, 3u}) CHECK(std::isfinite(leading_term_ratio(u, k)));
  CHECK(leading_term_ratio(GridField(64), 2) == 0.0);
}
