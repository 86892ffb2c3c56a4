#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "riesz/profile.hpp"

using namespace riesz;

static QuadratureConfig test_quad() {
  QuadratureConfig cfg;
  cfg.r_min = 1e-6;
  cfg.r_max = 1e6;
  cfg.points_per_decade = 32;
  return cfg;
}

TEST_CASE("builtin profiles have the declared supports and exponents") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto f0 = make_f0(pr);
  auto g0 = make_g0(pr);
  auto h = make_h(pr);
  CHECK(f0.eval(0.5) == 0.0);
  CHECK(f0.eval(2.0) == doctest::Approx(std::pow(2.0, -1.7)));
  CHECK(g0.eval(2.0) == 0.0);
  CHECK(g0.eval(0.5) == doctest::Approx(std::pow(0.5, -0.9)));
  CHECK(h.eval(0.5) == doctest::Approx(g0.eval(0.5)));
  CHECK(h.eval(2.0) == doctest::Approx(f0.eval(2.0)));
}

TEST_CASE("membership in L(p_-, p_+)") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  for (const auto& f : {make_f0(pr), make_g0(pr), make_h(pr)})
    CHECK(in_L_interval(f, ch.p_minus, ch.p_plus, pr));
  // f0 leaves L_p exactly at p_-: the closed-form norm diverges there.
  CHECK_FALSE(in_Lp(make_f0(pr), ch.p_minus, pr));
  CHECK_FALSE(in_Lp(make_g0(pr), ch.p_plus, pr));
}

TEST_CASE("closed-form norms match quadrature") {
  struct C {
    int d;
    double a, b, l;
  } cs[] = {{2, 0.3, 0.2, 0.8}, {1, 0.0, 0.0, 0.5}, {3, 0.5, 0.5, 1.0}};
  auto cfg = test_quad();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.1, 0.9);
  for (auto c : cs) {
    auto pr = validate_params(c.d, c.a, c.b, c.l);
    auto ch = exponent_chart(pr);
    for (int i = 0; i < 8; ++i) {
      double p = ch.p_minus + uni(rng) * (ch.p_plus - ch.p_minus);
      for (const auto& f : {make_f0(pr), make_g0(pr), make_h(pr)}) {
        auto cl = lp_norm_closed(f, p, pr);
        REQUIRE(cl.has_value());
        double qd = lp_norm_quad(f, p, pr, cfg);
        CHECK(qd == doctest::Approx(*cl).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("quadrature norm handles log-power pieces") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  RadialProfile f;
  f.pieces.push_back({1.0, -0.5, 2, 2.0, 50.0});
  // exact: omega * \int_2^50 r^{-0.5p} (log r)^{2p} r^{d-1} dr at p = 2
  double exact = sphere_surface(2) * powlog_integral(-1.0 * 2.0 * 0.5 + 1.0, 4, 2.0, 50.0);
  double qd = lp_norm_quad(f, 2.0, pr, test_quad());
  CHECK(qd == doctest::Approx(std::sqrt(exact)).epsilon(1e-9));
}

TEST_CASE("dilation acts pointwise and scales norms") {
  auto pr = validate_params(3, 0.5, 0.5, 1.0);
  RadialProfile f;
  f.pieces.push_back({2.0, -0.7, 1, 1.5, 40.0});
  f.pieces.push_back({0.5, -1.8, 0, 40.0, kInf});
  for (double t : {0.25, 3.0}) {
    auto ft = dilate(f, t);
    for (double r : {0.7, 2.0, 11.0, 300.0})
      CHECK(ft.eval(r) == doctest::Approx(f.eval(t * r)).epsilon(1e-12));
    double p = 2.2;
    double n0 = lp_norm_quad(f, p, pr, test_quad());
    double nt = lp_norm_quad(ft, p, pr, test_quad());
    CHECK(nt == doctest::Approx(std::pow(t, -3.0 / p) * n0).epsilon(1e-8));
  }
}

TEST_CASE("closed-form norm reports divergence as nullopt") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  CHECK_FALSE(lp_norm_closed(make_f0(pr), ch.p_minus, pr).has_value());
  CHECK_FALSE(lp_norm_closed(make_g0(pr), ch.p_plus + 0.5, pr).has_value());
  CHECK_THROWS_AS(lp_norm_quad(make_f0(pr), ch.p_minus, pr, test_quad()), DivergentNormError);
}

TEST_CASE("JSON round trip") {
  RadialProfile f;
  f.pieces.push_back({1.25, -0.75, 1, 0.0, 1.0});
  f.pieces.push_back({-0.5, -2.25, 0, 1.0, kInf});
  auto j = to_json(f);
  auto g = profile_from_json(j, "roundtrip");
  REQUIRE(g.pieces.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(g.pieces[i].coef == f.pieces[i].coef);
    CHECK(g.pieces[i].power == f.pieces[i].power);
    CHECK(g.pieces[i].log_power == f.pieces[i].log_power);
    CHECK(g.pieces[i].r_lo == f.pieces[i].r_lo);
    CHECK(g.pieces[i].r_hi == f.pieces[i].r_hi);
  }
  CHECK_THROWS_AS(profile_from_json(nlohmann::json{{"coef", 1.0}}), ConfigError);
}
