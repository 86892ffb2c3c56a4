#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "riesz/sweep.hpp"

using namespace riesz;

static QuadratureConfig test_quad() {
  QuadratureConfig cfg;
  cfg.r_min = 1e-5;
  cfg.r_max = 1e5;
  cfg.points_per_decade = 32;
  return cfg;
}

static std::vector<double> eps_grid() {
  std::vector<double> g;
  for (int k = 2; k <= 9; ++k) g.push_back(std::pow(2.0, -k));
  return g;
}

TEST_CASE("sweep rows are sorted and internally consistent") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  auto rows = sweep(pr, make_h(pr), eps_grid(), test_quad());
  REQUIRE(rows.size() == 16);
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i > 0) CHECK(row.p > rows[i - 1].p);
    CHECK(row.q == doctest::Approx(conjugate_q(ch, row.p).q).epsilon(1e-13));
    CHECK(row.ratio == doctest::Approx(row.norm_u / row.norm_f).epsilon(1e-13));
    double comp = row.ratio * std::pow((row.p - ch.p_minus) * (ch.p_plus - row.p), ch.kappa);
    CHECK(row.compensated == doctest::Approx(comp).epsilon(1e-13));
    CHECK(row.compensated > 0.0);
  }
}

TEST_CASE("sweep validates the epsilon grid") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  CHECK_THROWS_AS(sweep(pr, make_h(pr), {0.5}, test_quad()), OutOfRangeError);
  CHECK_THROWS_AS(sweep(pr, make_h(pr), {0.0}, test_quad()), OutOfRangeError);
  CHECK_THROWS_AS(sweep(pr, make_h(pr), {-0.1}, test_quad()), OutOfRangeError);
  CHECK(sweep(pr, make_h(pr), {}, test_quad()).empty());
}

TEST_CASE("endpoint slope fits recover -kappa") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  auto rows = sweep(pr, make_h(pr), eps_grid(), test_quad());
  auto lo = fit_endpoint_exponent(rows, Endpoint::lower, ch);
  auto hi = fit_endpoint_exponent(rows, Endpoint::upper, ch);
  CHECK(lo.slope == doctest::Approx(-ch.kappa).epsilon(0.16));
  CHECK(hi.slope == doctest::Approx(-ch.kappa).epsilon(0.16));
  CHECK(lo.points_used >= 5);
  CHECK(hi.points_used >= 5);
}

TEST_CASE("fit needs at least five usable rows") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  auto rows = sweep(pr, make_h(pr), {0.25, 0.125}, test_quad());
  CHECK_THROWS_AS(fit_endpoint_exponent(rows, Endpoint::lower, ch), InsufficientData);
}

TEST_CASE("lower bound constant and envelope") {
  std::vector<SweepRow> rows(3);
  rows[0].compensated = 2.0;
  rows[1].compensated = 1.5;
  rows[2].compensated = 3.0;
  CHECK(lower_bound_constant(rows) == 1.5);
  CHECK(envelope_boundedness(rows) == doctest::Approx(2.0));
  CHECK_THROWS_AS(lower_bound_constant(std::vector<SweepRow>{}), InsufficientData);
  CHECK_THROWS_AS(envelope_boundedness(std::vector<SweepRow>{}), InsufficientData);
}

TEST_CASE("power method trace is nondecreasing and starts at the plain ratio") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  auto cfg = test_quad();
  double p = 0.5 * (ch.p_minus + ch.p_plus);
  auto res = power_method_estimate(pr, p, make_h(pr), 8, cfg);
  REQUIRE(!res.iterate_ratios.empty());
  auto base = riesz_ratio(pr, make_h(pr), p, cfg);
  CHECK(res.iterate_ratios.front() == doctest::Approx(base.ratio).epsilon(1e-12));
  for (size_t i = 1; i < res.iterate_ratios.size(); ++i)
    CHECK(res.iterate_ratios[i] >= res.iterate_ratios[i - 1] * (1.0 - 1e-6));
  CHECK(res.v_lower == res.iterate_ratios.back());
  CHECK(res.v_lower >= base.ratio - 1e-4);
  CHECK(res.iterate_ratios.size() > 1);  // refinement actually happens mid-interval
}

TEST_CASE("power method rejects bad starts") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto ch = exponent_chart(pr);
  RadialProfile z;
  double p = 0.5 * (ch.p_minus + ch.p_plus);
  CHECK_THROWS_AS(power_method_estimate(pr, p, z, 5, test_quad()), NotInLError);
}

TEST_CASE("format_double round trips") {
  for (double v : {1.0, 0.1, 1.0 / 3.0, 1e-300, 12345.6789e77}) {
    std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("sweep CSV has the declared header and is stable") {
  auto pr = validate_params(2, 0.3, 0.2, 0.8);
  auto rows = sweep(pr, make_h(pr), {0.25}, test_quad());
  std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("p,q,norm_f,norm_u,ratio,compensated\n", 0) == 0);
  auto rows2 = sweep(pr, make_h(pr), {0.25}, test_quad());
  CHECK(csv == sweep_csv(rows2));
}
