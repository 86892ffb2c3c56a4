#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "riesz/exponents.hpp"

using namespace riesz;

TEST_CASE("validate_params rejects bad quadruples") {
  CHECK_THROWS_AS(validate_params(0, 0.1, 0.1, 0.5), DimensionError);
  CHECK_THROWS_AS(validate_params(2, -0.1, 0.1, 0.5), SignError);
  CHECK_THROWS_AS(validate_params(2, 0.1, -0.1, 0.5), SignError);
  CHECK_THROWS_AS(validate_params(2, 0.1, 0.1, 0.0), SignError);
  CHECK_THROWS_AS(validate_params(2, 0.5, 0.5, 1.0), SubcriticalityError);
  CHECK_THROWS_AS(validate_params(1, 0.3, 0.3, 0.5), SubcriticalityError);
  CHECK_NOTHROW(validate_params(2, 0.3, 0.2, 0.8));
}

TEST_CASE("chart endpoints and kappa") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  CHECK(ch.p_minus == doctest::Approx(2.0 / 1.7).epsilon(1e-14));
  CHECK(ch.p_plus == doctest::Approx(2.0 / 0.9).epsilon(1e-14));
  CHECK(ch.q_minus == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ch.q_plus == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(ch.kappa == doctest::Approx(0.65).epsilon(1e-14));
}

TEST_CASE("beta = 0 gives q_plus = infinity") {
  auto ch = exponent_chart(validate_params(1, 0.0, 0.0, 0.5));
  CHECK(std::isinf(ch.q_plus));
  CHECK(ch.q_minus == doctest::Approx(2.0));
  CHECK(ch.kappa == doctest::Approx(0.5));
}

TEST_CASE("conjugate line identity on random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    int d = 1 + static_cast<int>(uni(rng) * 5.0);
    double a = uni(rng) * 0.4 * d;
    double b = uni(rng) * 0.3 * d;
    double l = 0.01 + uni(rng) * (0.99 * d - a - b);
    if (!(l > 0.0)) continue;
    auto pr = validate_params(d, a, b, l);
    auto ch = exponent_chart(pr);
    CHECK(ch.kappa > 0.0);
    CHECK(ch.kappa < 1.0);
    double p = ch.p_minus + (0.1 + 0.8 * uni(rng)) * (ch.p_plus - ch.p_minus);
    auto gp = conjugate_q(ch, p);
    // 1 + 1/q = 1/p + kappa
    CHECK(1.0 + 1.0 / gp.q == doctest::Approx(1.0 / p + ch.kappa).epsilon(1e-13));
    CHECK(gp.q_dual == doctest::Approx(gp.q / (gp.q - 1.0)).epsilon(1e-13));
    CHECK(in_G(pr, p, gp.q));
    CHECK_FALSE(in_G(pr, p, gp.q * 1.01));
  }
}

TEST_CASE("q(p) hits the dual endpoints in the limits") {
  // 1/q(p_-) = 1/p_- + kappa - 1 = (beta+lambda)/d, so q(p_-) = q_-;
  // likewise q(p_+) = q_+. Checked via the defining formula since
  // conjugate_q keeps the interval open.
  auto ch = exponent_chart(validate_params(3, 0.5, 0.5, 1.0));
  double inv_lo = 1.0 / ch.p_minus + ch.kappa - 1.0;
  double inv_hi = 1.0 / ch.p_plus + ch.kappa - 1.0;
  CHECK(1.0 / inv_lo == doctest::Approx(ch.q_minus).epsilon(1e-13));
  CHECK(1.0 / inv_hi == doctest::Approx(ch.q_plus).epsilon(1e-13));
}

TEST_CASE("conjugate_q rejects p outside the open interval") {
  auto ch = exponent_chart(validate_params(2, 0.3, 0.2, 0.8));
  CHECK_THROWS_AS(conjugate_q(ch, ch.p_minus), OutOfRangeError);
  CHECK_THROWS_AS(conjugate_q(ch, ch.p_plus), OutOfRangeError);
  CHECK_THROWS_AS(conjugate_q(ch, 0.9), OutOfRangeError);
  CHECK_THROWS_AS(conjugate_q(ch, 5.0), OutOfRangeError);
}
