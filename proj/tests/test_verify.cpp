#include <catch_amalgamated.hpp>

#include <chrono>
#include <set>

#include "bh/verify.hpp"

using namespace bh;

TEST_CASE("identity battery passes at n = 256") {
  const auto start = std::chrono::steady_clock::now();
  const auto report = run_identity_suite(256, 7);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(report.checks.size() >= 12);
  for (const auto& c : report.checks) {
    INFO(c.name << " residual " << c.residual);
    CHECK(c.passed());
    CHECK(c.tolerance == 1e-10);
  }
  CHECK(report.all_passed());
  CHECK(seconds < 10.0);
  CHECK(report.recorded.size() == 2);
}

TEST_CASE("check names are unique") {
  const auto report = run_identity_suite(64, 1);
  std::set<std::string> names;
  for (const auto& c : report.checks) names.insert(c.name);
  CHECK(names.size() == report.checks.size());
}

TEST_CASE("battery passes for other sizes and seeds") {
  for (std::size_t n : {64u, 512u}) {
    for (std::uint64_t seed : {1u, 99u}) CHECK(run_identity_suite(n, seed).all_passed());
  }
}

TEST_CASE("failing checks are reported as failures") {
  CheckResult c{"x", 1e-3, 1e-10};
  CHECK_FALSE(c.passed());
  c.residual = std::nan("");
  CHECK_FALSE(c.passed());
  CHECK_THROWS_AS(run_identity_suite(100, 1), ConfigError);
}
