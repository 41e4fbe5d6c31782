#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lpstable/errors.hpp"
#include "lpstable/slowly_varying.hpp"
#include "oracles.hpp"

using namespace lpstable;
using doctest::Approx;

TEST_CASE("eval_sv examples") {
  CHECK(eval_sv(SlowlyVaryingSpec::constant(1.0), 100.0) == 1.0);
  CHECK(eval_sv(SlowlyVaryingSpec::log_power(1.0, 1.0), 0.0) == Approx(1.0).epsilon(1e-15));
  const double e = std::numbers::e;
  CHECK(eval_sv(SlowlyVaryingSpec::log_power(2.0, -1.0), e * e - e) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("slow variation of eval_sv at large x") {
  for (double p : {-2.0, -1.0, 1.0, 2.0}) {
    const auto s = SlowlyVaryingSpec::log_power(1.0, p);
    for (double lambda : {2.0, 10.0}) {
      const double r = eval_sv(s, 1e8 * lambda) / eval_sv(s, 1e8);
      CHECK(std::abs(r - 1.0) < 0.3);  // (1 + ln(lambda) / ln(1e8))^|p| - 1 <= 0.265
      const double r4 = eval_sv(s, 1e4 * lambda) / eval_sv(s, 1e4);
      CHECK(std::abs(r - 1.0) <= std::abs(r4 - 1.0));
    }
  }
  const auto s = SlowlyVaryingSpec::log_power(1.0, 1.0);
  CHECK(std::abs(eval_sv(s, 2e8) / eval_sv(s, 1e8) - 1.0) < 0.05);
}

TEST_CASE("validate rejects bad specs") {
  CHECK_THROWS_AS(SlowlyVaryingSpec::constant(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SlowlyVaryingSpec::constant(-1.0).validate(), std::invalid_argument);
  SlowlyVaryingSpec bad = SlowlyVaryingSpec::log_power(1.0, 1.0);
  bad.shift = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("coefficient examples") {
  CHECK(coefficient(SlowlyVaryingSpec::constant(1.0), 1) == 1.0);
  CHECK(coefficient(SlowlyVaryingSpec::constant(1.0), 4) == 0.25);
  CHECK(coefficient(SlowlyVaryingSpec::log_power(1.0, 1.0), 1) == Approx(std::log(std::numbers::e + 1.0)));
  CHECK(coefficient(SlowlyVaryingSpec::log_power(1.0, 1.0), 1) == Approx(1.31326).epsilon(1e-5));
  CHECK_THROWS_AS(coefficient(SlowlyVaryingSpec::constant(1.0), 0), std::invalid_argument);
}

TEST_CASE("prefix sums") {
  const auto S = coefficient_prefix_sums(SlowlyVaryingSpec::constant(1.0), 3);
  REQUIRE(S.size() == 4);
  CHECK(S[0] == 0.0);
  CHECK(S[1] == 1.0);
  CHECK(S[2] == 1.5);
  CHECK(S[3] == Approx(11.0 / 6.0).epsilon(1e-15));
  CHECK(coefficient_prefix_sums(SlowlyVaryingSpec::constant(1.0), 1) == std::vector<double>{0.0, 1.0});
  CHECK(coefficient_prefix_sums(SlowlyVaryingSpec::constant(2.0), 2) == std::vector<double>{0.0, 2.0, 3.0});
  CHECK_THROWS_AS(coefficient_prefix_sums(SlowlyVaryingSpec::constant(1.0), 0), std::invalid_argument);

  std::mt19937_64 gen(7);
  for (const auto& ell : {SlowlyVaryingSpec::constant(3.0), SlowlyVaryingSpec::log_power(1.0, -2.0),
                          SlowlyVaryingSpec::log_power(0.5, 1.5)}) {
    const auto P = coefficient_prefix_sums(ell, 5000);
    for (int trial = 0; trial < 50; ++trial) {
      const auto k = static_cast<std::int64_t>(1 + gen() % 5000);
      const double a = oracle::coeff(ell, k);
      CHECK(std::abs(P[k] - P[k - 1] - a) <= 1e-14 * P[k]);
      CHECK(P[k] > P[k - 1]);
    }
  }
}

TEST_CASE("big_h examples") {
  CHECK(big_h(SlowlyVaryingSpec::constant(3.0), 1.5, 1e6) == 3.0);
  CHECK(big_h(SlowlyVaryingSpec::constant(1.0), 2.0, std::numbers::e) == Approx(2.0).epsilon(1e-14));
  const double e2 = std::exp(2.0);
  CHECK(big_h(SlowlyVaryingSpec::bare_log_power(1.0, 1.0), 2.0, e2) == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(big_h(SlowlyVaryingSpec::constant(1.0), 1.5, 0.5), std::invalid_argument);
}

TEST_CASE("big_h at alpha = 2 against a plain Riemann sum") {
  // -int_1^t s^2 d(h(s)/s^2) = 2 int_1^t h(s)/s ds - h(t) + h(1)
  const auto h = SlowlyVaryingSpec::log_power(1.5, -1.0);
  const double t = 500.0;
  const int n = 200000;
  double integral = 0.0;
  const double L = std::log(t);
  for (int k = 0; k < n; ++k) {
    const double y = (k + 0.5) * L / n;
    integral += eval_sv(h, std::exp(y)) * L / n;
  }
  const double expected = 2.0 * integral - eval_sv(h, t) + eval_sv(h, 1.0);
  CHECK(big_h(h, 2.0, t) == Approx(expected).epsilon(1e-8));
}

TEST_CASE("h_alpha examples") {
  CHECK(h_alpha(SlowlyVaryingSpec::constant(1.0), 1.5, 1e6) == 1.0);
  const double N = std::exp(1.5);
  const auto r = solve_h_alpha(SlowlyVaryingSpec::bare_log_power(1.0, 1.0), 1.5, N);
  CHECK(r.value == Approx(1.0).epsilon(1e-10));
  CHECK(r.residual < 1e-10);

  const auto c5 = SlowlyVaryingSpec::constant(5.0);
  const double ref = oracle::h_alpha_bisect([&](double t) { return big_h(c5, 2.0, t); }, 2.0, 1e3);
  CHECK(h_alpha(c5, 2.0, 1e3) == Approx(ref).epsilon(1e-10));
}

TEST_CASE("h_alpha agrees with bisection across families") {
  for (const auto& h : {SlowlyVaryingSpec::constant(1.0), SlowlyVaryingSpec::log_power(1.0, -2.0),
                        SlowlyVaryingSpec::log_power(1.0, 1.0), SlowlyVaryingSpec::log_power(2.0, 2.0)}) {
    for (double alpha : {1.2, 1.5, 2.0}) {
      for (double N : {1e2, 1e5}) {
        const auto r = solve_h_alpha(h, alpha, N);
        const double ref = oracle::h_alpha_bisect([&](double t) { return big_h(h, alpha, t); }, alpha, N);
        CHECK(r.value == Approx(ref).epsilon(1e-9));
        CHECK(r.residual < 1e-10);
      }
    }
  }
}

TEST_CASE("h_alpha is slowly varying") {
  for (double p : {-2.0, -1.0, 1.0, 2.0}) {
    const auto h = SlowlyVaryingSpec::log_power(1.0, p);
    for (double alpha : {1.5, 2.0}) {
      // deviation ~ |p| ln 2 / ln(N^{1/alpha}); shrinks with N
      const double ratio = h_alpha(h, alpha, 2e8) / h_alpha(h, alpha, 1e8);
      const double early = h_alpha(h, alpha, 2e4) / h_alpha(h, alpha, 1e4);
      CHECK(std::abs(ratio - 1.0) < 0.15);
      CHECK(std::abs(ratio - 1.0) < std::abs(early - 1.0));
    }
  }
}

TEST_CASE("normalizer examples") {
  const auto one = SlowlyVaryingSpec::constant(1.0);
  CHECK(normalizer({one, one, 1.5, 1}) == Approx(1.0).epsilon(1e-15));
  CHECK(normalizer({one, one, 1.5, 2}) == Approx(std::pow(2.0, 2.0 / 3.0) * 1.5).epsilon(1e-14));
  CHECK(normalizer({one, one, 1.5, 2}) == Approx(2.38110).epsilon(1e-5));
  // At alpha = 2 with N = 1 the tail-function H has no fixed point; the CF-level H = 1 is the
  // convention that gives A_1 = 1.
  CHECK(normalizer({one, one, 2.0, 1, HMode::CfLevel}) == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS(normalizer({one, one, 2.0, 1, HMode::TailFunction}));
}

TEST_CASE("normalizer is increasing for constant ell") {
  const auto ell = SlowlyVaryingSpec::constant(2.0);
  const auto h = SlowlyVaryingSpec::constant(1.0);
  const auto prefix = coefficient_prefix_sums(ell, 1000);
  double prev = 0.0;
  for (std::int64_t N = 1; N <= 1000; ++N) {
    const double a = normalizer({ell, h, 1.5, N}, prefix);
    CHECK(a > prev);
    prev = a;
  }
}
