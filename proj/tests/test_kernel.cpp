#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "riesz/kernel.hpp"

using namespace riesz;

TEST_CASE("symmetry in (r, s)") {
  for (int d : {1, 2, 3, 4}) {
    double lam = 0.4 * d;
    for (auto [r, s] : {std::pair{0.3, 1.7}, {2.0, 0.05}, {5.0, 4.0}}) {
      double a = angular_kernel(d, lam, r, s);
      double b = angular_kernel(d, lam, s, r);
      CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
  }
}

TEST_CASE("homogeneity: Phi(tr, ts) = t^-lambda Phi(r, s)") {
  for (int d : {1, 2, 3, 5}) {
    double lam = 0.6 * d;
    for (double t : {0.125, 8.0}) {
      double a = angular_kernel(d, lam, t * 0.7, t * 2.9);
      double b = std::pow(t, -lam) * angular_kernel(d, lam, 0.7, 2.9);
      CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
  }
}

TEST_CASE("d = 3 closed form against the theta quadrature") {
  double lam = 1.3;
  for (double t : {-4.0, -0.9, -0.02, 0.3, 2.5}) {
    double rho = std::exp(t);
    double closed = phi_log_ratio(3, lam, t);
    double generic = detail::phi_theta_quad(3, lam, rho, std::expm1(t), 1e-12, 400);
    CHECK(generic == doctest::Approx(closed).epsilon(1e-9));
  }
}

// The d = 1 sphere is the two-point set {-1, +1}; the closed form must equal
// the average of |rho -+ 1|^{-lambda} taken directly from the definition.
TEST_CASE("d = 1 closed form against the two-point definition") {
  double lam = 0.5;
  for (double t : {-2.0, -0.1, 0.4, 3.0}) {
    double rho = std::exp(t);
    double direct = std::pow(std::abs(rho - 1.0), -lam) + std::pow(rho + 1.0, -lam);
    CHECK(phi_log_ratio(1, lam, t) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("s = 0 collapse: Phi -> omega max(r,s)^-lambda") {
  for (int d : {1, 2, 3, 4}) {
    double lam = 0.5 * d;
    double r = 1.7;
    double exact = sphere_surface(d) * std::pow(r, -lam);
    CHECK(angular_kernel(d, lam, r, 0.0) == doctest::Approx(exact).epsilon(1e-12));
    CHECK(angular_kernel(d, lam, 0.0, r) == doctest::Approx(exact).epsilon(1e-12));
    // and the generic path approaches it for s << r
    CHECK(angular_kernel(d, lam, r, r * 1e-7) == doctest::Approx(exact).epsilon(1e-5));
  }
}

TEST_CASE("diagonal blow-up law for lambda > d-1") {
  for (int d : {2, 3}) {
    double lam = d - 0.4;
    double K = diagonal_coefficient(d, lam);
    double prev_ratio = 0.0;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      double phi = angular_kernel(d, lam, 1.0, 1.0 + eps);
      double law = K * std::pow(1.0 + eps, -0.5 * (d - 1)) * std::pow(eps, d - 1 - lam);
      double ratio = phi / law;
      CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
      if (prev_ratio != 0.0)  // converging toward the law
        CHECK(std::abs(ratio - 1.0) < std::abs(prev_ratio - 1.0));
      prev_ratio = ratio;
    }
  }
}

TEST_CASE("diagonal singularity guarded") {
  CHECK_THROWS_AS(angular_kernel(2, 1.5, 1.0, 1.0), SingularArgumentError);
  CHECK_THROWS_AS(angular_kernel(1, 0.5, 2.0, 2.0), SingularArgumentError);
  CHECK_THROWS_AS(angular_kernel(2, 0.0, 1.0, 2.0), OutOfRangeError);
  CHECK_THROWS_AS(angular_kernel(2, 2.0, 1.0, 2.0), OutOfRangeError);
  // lambda < d-1: the diagonal is finite
  CHECK(angular_kernel(3, 0.8, 1.0, 1.0) > 0.0);
}

// Monte Carlo sphere average: an implementation-independent oracle for Phi.
TEST_CASE("Monte Carlo sphere-average oracle") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  struct Case {
    int d;
    double lam, r, s;
  } cases[] = {{2, 0.8, 1.0, 0.45}, {3, 1.0, 1.0, 2.2}, {3, 1.7, 1.0, 0.8}};
  for (auto c : cases) {
    long long n = 400000;
    double sum = 0.0, sum2 = 0.0;
    for (long long i = 0; i < n; ++i) {
      double cosg = (c.d == 2) ? std::cos(2.0 * kPi * uni(rng)) : 2.0 * uni(rng) - 1.0;
      double a2 = c.r * c.r + c.s * c.s - 2.0 * c.r * c.s * cosg;
      double v = std::pow(a2, -0.5 * c.lam);
      sum += v;
      sum2 += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
    double mc = sphere_surface(c.d) * mean;
    double quad = angular_kernel(c.d, c.lam, c.r, c.s);
    CHECK(std::abs(quad - sphere_surface(c.d) * mean) <= 4.0 * sphere_surface(c.d) * se + 1e-12);
    CHECK(mc == doctest::Approx(quad).epsilon(0.02));
  }
}

TEST_CASE("kernel cache returns identical values and memoizes") {
  KernelCache cache(2, 0.8);
  double a = cache.phi(0.37);
  double b = cache.phi(0.37);
  CHECK(a == b);
  CHECK(cache.size() == 1);
  CHECK(a == doctest::Approx(phi_log_ratio(2, 0.8, 0.37)));
}
