#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "riesz/operator.hpp"

using namespace riesz;

static QuadratureConfig test_quad() {
  QuadratureConfig cfg;
  cfg.r_min = 1e-5;
  cfg.r_max = 1e5;
  cfg.points_per_decade = 32;
  return cfg;
}

static RieszParams config_a() { return validate_params(2, 0.3, 0.2, 0.8); }

TEST_CASE("apply rejects profiles outside L(p_-, p_+)") {
  auto pr = config_a();
  RadialProfile bad;
  bad.pieces.push_back({1.0, -1.6, 0, 1.0, kInf});  // too slow a tail near p_-
  CHECK_THROWS_AS(apply(pr, bad, test_quad()), NotInLError);
}

TEST_CASE("zero profile maps to the zero potential") {
  auto pr = config_a();
  RadialProfile z;
  auto u = apply(pr, z, test_quad());
  CHECK(potential_lq_norm(u, 3.0) == 0.0);
  CHECK(u.value_at(1.0) == 0.0);
}

// Endpoint profile asymptotics: for h = f0 + g0 the potential must grow like
// r^{-beta} |log r| near zero and decay like r^{-(beta+lambda)} log r at
// infinity; both marginal cases carry the extra log factor.
TEST_CASE("potential of h has the marginal log asymptotics") {
  auto pr = config_a();
  auto u = apply(pr, make_h(pr), test_quad());
  CHECK(u.head.power == doctest::Approx(-pr.beta).epsilon(1e-12));
  CHECK(u.head.log_exp == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.tail.power == doctest::Approx(-(pr.beta + pr.lambda)).epsilon(1e-12));
  CHECK(u.tail.log_exp == doctest::Approx(1.0).epsilon(1e-12));
  // in-grid confirmation: u * r^beta / (-log r) bounded on [1e-4, 1e-1] ...
  double lo1 = kInf, hi1 = 0.0;
  for (double r = 1e-4; r < 1e-1; r *= 2.0) {
    double val = u.value_at(r) * std::pow(r, pr.beta) / (-std::log(r));
    lo1 = std::min(lo1, val);
    hi1 = std::max(hi1, val);
  }
  CHECK(lo1 > 0.0);
  CHECK(hi1 / lo1 < 3.0);
  // ... and u * r^(beta+lambda) / log r bounded on [10, 1e4]
  double lo2 = kInf, hi2 = 0.0;
  for (double r = 10.0; r < 1e4; r *= 2.0) {
    double val = u.value_at(r) * std::pow(r, pr.beta + pr.lambda) / std::log(r);
    lo2 = std::min(lo2, val);
    hi2 = std::max(hi2, val);
  }
  CHECK(lo2 > 0.0);
  CHECK(hi2 / lo2 < 3.0);
}

TEST_CASE("clean (non-marginal) input maps to pure power edges") {
  auto pr = config_a();
  RadialProfile f;
  f.pieces.push_back({1.0, 0.0, 0, 0.5, 2.0});  // bump, compactly supported
  auto u = apply(pr, f, test_quad());
  // head: moment-dominated r^-beta, tail: r^-(beta+lambda)
  CHECK(u.head.power == doctest::Approx(-pr.beta).epsilon(1e-12));
  CHECK(u.head.log_exp == 0.0);
  CHECK(u.tail.power == doctest::Approx(-(pr.beta + pr.lambda)).epsilon(1e-12));
  CHECK(u.tail.log_exp == 0.0);
}

TEST_CASE("dilation identity for several scales") {
  struct C {
    int d;
    double a, b, l;
  } cs[] = {{2, 0.3, 0.2, 0.8}, {1, 0.0, 0.0, 0.5}, {3, 0.5, 0.5, 1.0}};
  auto cfg = test_quad();
  for (auto c : cs) {
    auto pr = validate_params(c.d, c.a, c.b, c.l);
    auto g0 = make_g0(pr);
    for (double t : {0.25, 0.5, 2.0, 4.0}) {
      double dev = dilation_identity_check(pr, g0, t, cfg);
      CHECK(dev <= 5e-7);
    }
  }
}

TEST_CASE("bilinear functional is adjoint-symmetric") {
  auto cfg = test_quad();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto pr = validate_params(3, 0.4, 0.3, 1.1);
  RieszParams adj{pr.d, pr.beta, pr.alpha, pr.lambda};
  for (int i = 0; i < 6; ++i) {
    RadialProfile f, g;
    f.pieces.push_back({0.5 + uni(rng), -uni(rng), 0, 0.02 + uni(rng), 5.0 + 20.0 * uni(rng)});
    g.pieces.push_back({0.5 + uni(rng), -uni(rng), 1, 0.05 + uni(rng), 3.0 + 30.0 * uni(rng)});
    double ab = bilinear(pr, f, g, cfg);
    double ba = bilinear(adj, g, f, cfg);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-8));
  }
}

TEST_CASE("bilinear agrees with pairing the potential against g") {
  auto pr = config_a();
  auto cfg = test_quad();
  auto f = make_g0(pr);
  RadialProfile g;
  g.pieces.push_back({1.0, -0.4, 0, 0.1, 10.0});
  double direct = bilinear(pr, f, g, cfg);
  // omega * \int u(r) g(r) r^{d-1} dr with u on the grid
  auto u = apply(pr, f, cfg);
  double acc = 0.0;
  auto fn = u.as_radial_fn();
  double w = std::log(10.0) / cfg.points_per_decade;
  for (double y = std::log(0.1); y < std::log(10.0) - 1e-12; y += w)
    acc += gl16_panel(
        [&](double yy) {
          double r = std::exp(yy);
          return fn.eval(r) * g.eval(r) * std::pow(r, pr.d);
        },
        y, std::min(y + w, std::log(10.0)));
  double paired = sphere_surface(pr.d) * acc;
  // paired side interpolates u between grid samples, so only O(h^2) agreement
  CHECK(direct == doctest::Approx(paired).epsilon(1e-4));
}

TEST_CASE("duality witness attains the q-norm") {
  struct C {
    int d;
    double a, b, l;
  } cs[] = {{2, 0.3, 0.2, 0.8}, {1, 0.0, 0.0, 0.5}, {3, 0.5, 0.5, 1.0}};
  auto cfg = test_quad();
  for (auto c : cs) {
    auto pr = validate_params(c.d, c.a, c.b, c.l);
    auto ch = exponent_chart(pr);
    for (double frac : {0.35, 0.6}) {
      double p = ch.p_minus + frac * (ch.p_plus - ch.p_minus);
      auto w = duality_witness(pr, make_h(pr), p, cfg);
      CHECK(w.gap <= 1e-6 * w.norm_u);
      CHECK(w.pairing == doctest::Approx(w.norm_u).epsilon(1e-6));
    }
  }
}

TEST_CASE("ratio is invariant under scalar multiples of f") {
  auto pr = config_a();
  auto ch = exponent_chart(pr);
  auto cfg = test_quad();
  double p = 0.5 * (ch.p_minus + ch.p_plus);
  auto r1 = riesz_ratio(pr, make_h(pr), p, cfg);
  auto r7 = riesz_ratio(pr, scale(make_h(pr), 7.0), p, cfg);
  CHECK(r7.ratio == doctest::Approx(r1.ratio).epsilon(1e-12));
  CHECK(r7.norm_f == doctest::Approx(7.0 * r1.norm_f).epsilon(1e-12));
}

TEST_CASE("off-line exponents break dilation invariance of the ratio") {
  auto pr = config_a();
  auto ch = exponent_chart(pr);
  auto cfg = test_quad();
  double p = ch.p_minus + 0.1 * (ch.p_plus - ch.p_minus);
  auto gp = conjugate_q(ch, p);
  auto h = make_h(pr);
  auto on1 = riesz_ratio(pr, h, p, cfg);
  auto on4 = riesz_ratio(pr, dilate(h, 4.0), p, cfg);
  CHECK(std::abs(on4.ratio - on1.ratio) <= 1e-3 * on1.ratio);
  auto off1 = riesz_ratio_q(pr, h, p, 1.1 * gp.q, cfg);
  auto off4 = riesz_ratio_q(pr, dilate(h, 4.0), p, 1.1 * gp.q, cfg);
  CHECK(std::abs(off4.ratio - off1.ratio) > 0.05 * off1.ratio);
}

TEST_CASE("pointwise power and scaling stay finite in log form") {
  auto pr = config_a();
  auto u = apply(pr, make_h(pr), test_quad());
  double nu = potential_lq_norm(u, 9.0);
  auto g = u.pointwise_pow_scaled(8.0, -8.0 * std::log(nu));
  for (double v : g.values) CHECK(std::isfinite(v));
  CHECK(potential_lq_norm(g, 9.0 / 8.0) == doctest::Approx(1.0).epsilon(1e-10));
}
