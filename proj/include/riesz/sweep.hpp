#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/exponents.hpp"
#include "riesz/operator.hpp"
#include "riesz/profile.hpp"

namespace riesz {

// One record of the p-sweep along the conjugate line.
struct SweepRow {
  double p = 0.0;
  double q = 0.0;
  double norm_f = 0.0;
  double norm_u = 0.0;
  double ratio = 0.0;
  double compensated = 0.0;  // ratio * ((p - p_minus)(p_plus - p))^kappa
};

// Ratio sweep over the geometric epsilon grid: evaluation points
// p = p_- + eps*(p_+ - p_-) and p = p_+ - eps*(p_+ - p_-) for each eps.
// The potential u = I f does not depend on p, so it is applied once and only
// the norms vary across rows.
inline std::vector<SweepRow> sweep(const RieszParams& pr, const RadialProfile& f,
                                   const std::vector<double>& eps_grid,
                                   const QuadratureConfig& cfg = {}) {
  std::vector<SweepRow> rows;
  if (eps_grid.empty()) return rows;
  ExponentChart chart = exponent_chart(pr);
  double width = chart.p_plus - chart.p_minus;
  SampledPotential u = apply(pr, f, cfg);
  bool pure = true;
  for (const auto& pc : f.pieces)
    if (pc.log_power > 0) pure = false;
  std::vector<double> ps;
  for (double eps : eps_grid) {
    if (!(eps > 0.0 && eps < 0.5)) throw OutOfRangeError("sweep: eps must lie in (0, 1/2)");
    ps.push_back(chart.p_minus + eps * width);
    ps.push_back(chart.p_plus - eps * width);
  }
  std::sort(ps.begin(), ps.end());
  for (double p : ps) {
    GPoint gp = conjugate_q(chart, p);
    SweepRow row;
    row.p = p;
    row.q = gp.q;
    if (pure) {
      auto cl = lp_norm_closed(f, p, pr);
      if (!cl) throw DivergentNormError("sweep: |f|_p divergent");
      row.norm_f = *cl;
    } else {
      row.norm_f = lp_norm_quad(f, p, pr, cfg);
    }
    row.norm_u = potential_lq_norm(u, gp.q);
    row.ratio = row.norm_u / row.norm_f;
    row.compensated =
        row.ratio * std::pow((p - chart.p_minus) * (chart.p_plus - p), chart.kappa);
    rows.push_back(row);
  }
  return rows;
}

enum class Endpoint { lower, upper };

struct FitReport {
  Endpoint endpoint = Endpoint::lower;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  int points_used = 0;
};

// Least-squares slope of log(ratio) against log(p - p_-) (lower endpoint) or
// log(p_+ - p) (upper endpoint), restricted to rows on that endpoint's half of
// the interval.
inline FitReport fit_endpoint_exponent(const std::vector<SweepRow>& rows, Endpoint ep,
                                       const ExponentChart& chart) {
  double mid = 0.5 * (chart.p_minus + chart.p_plus);
  double width = chart.p_plus - chart.p_minus;
  std::vector<double> x, y;
  for (const auto& row : rows) {
    bool take = (ep == Endpoint::lower) ? (row.p < mid) : (row.p > mid);
    if (!take || !(row.ratio > 0.0)) continue;
    double dist = (ep == Endpoint::lower) ? (row.p - chart.p_minus) : (chart.p_plus - row.p);
    if (!(dist > 0.0)) continue;
    // Restrict to the asymptotic window: at distances beyond ~8% of the
    // interval the opposite endpoint's (dist')^{-kappa} factor is no longer
    // flat and biases the slope away from the endpoint law.
    if (dist > 0.08 * width) continue;
    x.push_back(std::log(dist));
    y.push_back(std::log(row.ratio));
  }
  if (x.size() < 5) throw InsufficientData("fit_endpoint_exponent: need >= 5 rows");
  size_t n = x.size();
  std::vector<std::vector<double>> X(n, {1.0, 0.0});
  for (size_t i = 0; i < n; ++i) X[i][1] = x[i];
  auto beta = ols(X, y);
  FitReport rep;
  rep.endpoint = ep;
  rep.intercept = beta[0];
  rep.slope = beta[1];
  double rss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double res = y[i] - beta[0] - beta[1] * x[i];
    rss += res * res;
  }
  rep.residual = std::sqrt(rss / static_cast<double>(n));
  rep.points_used = static_cast<int>(n);
  return rep;
}

// Infimum of the compensated constant over the sweep: a lower bound (modulo
// quadrature error) for the constant in the two-sided blow-up law.
inline double lower_bound_constant(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw InsufficientData("lower_bound_constant: empty sweep");
  double m = kInf;
  for (const auto& row : rows) m = std::min(m, row.compensated);
  return m;
}

// ---------------------------------------------------------------------------
// Nonlinear power iteration for the p -> q operator norm:
//   u <- I_{a,b,l} f;  g <- u^{q-1}/|u|_q^{q-1};  v <- I_{b,a,l} g;
//   f <- v^{p'-1} normalized in L_p.
// Each ratio |I f|_q / |f|_p is a certified lower bound for the sharp
// constant, and the trace is nondecreasing for the positive kernel.

struct PowerMethodResult {
  double v_lower = 0.0;
  std::vector<double> iterate_ratios;
};

inline PowerMethodResult power_method_estimate(const RieszParams& pr, double p,
                                               const RadialProfile& f_init, int max_iter,
                                               const QuadratureConfig& cfg = {}) {
  ExponentChart chart = exponent_chart(pr);
  GPoint gp = conjugate_q(chart, p);
  if (f_init.is_zero() || !in_L_interval(f_init, chart.p_minus, chart.p_plus, pr))
    throw NotInLError("power_method_estimate: bad initial profile");
  double q = gp.q;
  double p_dual = p / (p - 1.0);
  RieszParams adj{pr.d, pr.beta, pr.alpha, pr.lambda};

  PowerMethodResult out;
  // First step from the analytic profile.
  SampledPotential u = apply(pr, f_init, cfg);
  {
    bool pure = true;
    for (const auto& pc : f_init.pieces)
      if (pc.log_power > 0) pure = false;
    double nf;
    if (pure) {
      auto cl = lp_norm_closed(f_init, p, pr);
      if (!cl) throw DivergentNormError("power_method_estimate: |f|_p divergent");
      nf = *cl;
    } else {
      nf = lp_norm_quad(f_init, p, pr, cfg);
    }
    double nu = potential_lq_norm(u, q);
    if (!(nu > 0.0) || !(nf > 0.0))
      throw NonPositiveIterate("power_method_estimate: vanishing iterate");
    out.iterate_ratios.push_back(nu / nf);
  }
  // Refinement continues only while every norm entering the next certified
  // ratio is representation-trusted: once an iterate's mass migrates past the
  // probe-validated window (near-endpoint p), further ratios would rest on
  // unvalidated extrapolation and the trace is cut instead.
  const double stress_tol = 1e-4;
  for (int it = 1; it < max_iter; ++it) {
    double nu = potential_lq_norm(u, q);
    if (!(nu > 0.0)) throw NonPositiveIterate("power_method_estimate: |u|_q = 0");
    // |g|_{q/(q-1)} = 1; fused so pow and normalization cancel in log space
    SampledPotential g = u.pointwise_pow_scaled(q - 1.0, -(q - 1.0) * std::log(nu));
    if (extrapolation_stress(g, q / (q - 1.0)) > stress_tol) break;
    SampledPotential v = apply_fn(adj, g.as_radial_fn(), cfg);
    if (extrapolation_stress(v, p_dual) > stress_tol) break;
    double nv = potential_lq_norm(v, p_dual);
    if (!(nv > 0.0)) throw NonPositiveIterate("power_method_estimate: |v|_{p'} = 0");
    SampledPotential fnew =
        v.pointwise_pow_scaled(p_dual - 1.0, -(p_dual - 1.0) * std::log(nv));  // |f|_p = 1
    if (extrapolation_stress(fnew, p) > stress_tol) break;
    SampledPotential unew = apply_fn(pr, fnew.as_radial_fn(), cfg);
    if (extrapolation_stress(unew, q) > stress_tol) break;
    u = unew;
    double ratio = potential_lq_norm(u, q);  // |f|_p = 1
    out.iterate_ratios.push_back(ratio);
    double prev = out.iterate_ratios[out.iterate_ratios.size() - 2];
    if (std::abs(ratio - prev) < 1e-6 * std::abs(ratio)) break;
  }
  out.v_lower = out.iterate_ratios.back();
  return out;
}

// Max/min of the compensated power-method lower bounds across a sweep; a
// moderate value is the desk-scale consistency check of the two-sided law (it
// cannot prove the upper bound, only fail to falsify it).
inline double envelope_boundedness(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw InsufficientData("envelope_boundedness: empty rows");
  double lo = kInf, hi = 0.0;
  for (const auto& row : rows) {
    if (!(row.compensated > 0.0)) throw InsufficientData("envelope_boundedness: nonpositive row");
    lo = std::min(lo, row.compensated);
    hi = std::max(hi, row.compensated);
  }
  return hi / lo;
}

// ---------------------------------------------------------------------------
// CSV output: fixed header, shortest round-trip decimals, bit-exact across
// runs with identical inputs.

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "p,q,norm_f,norm_u,ratio,compensated\n";
  for (const auto& row : rows) {
    out += format_double(row.p);
    out += ',';
    out += format_double(row.q);
    out += ',';
    out += format_double(row.norm_f);
    out += ',';
    out += format_double(row.norm_u);
    out += ',';
    out += format_double(row.ratio);
    out += ',';
    out += format_double(row.compensated);
    out += '\n';
  }
  return out;
}

}  // namespace riesz
