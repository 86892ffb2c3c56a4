#pragma once

#include <cmath>

#include "riesz/errors.hpp"
#include "riesz/math_util.hpp"

namespace riesz {

// Parameter quadruple (d, alpha, beta, lambda) of the weighted Riesz operator
//   I f(x) = |x|^{-beta} \int f(y) |y|^{-alpha} |x-y|^{-lambda} dy.
struct RieszParams {
  int d = 1;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;

  double exponent_sum() const { return alpha + beta + lambda; }
};

inline RieszParams validate_params(int d, double alpha, double beta, double lambda) {
  if (d < 1) throw DimensionError("dimension must be a positive integer");
  if (alpha < 0.0 || beta < 0.0) throw SignError("alpha and beta must be >= 0");
  if (!(lambda > 0.0)) throw SignError("lambda must be > 0");
  if (!(alpha + beta + lambda < static_cast<double>(d)))
    throw SubcriticalityError("alpha + beta + lambda must be < d");
  return RieszParams{d, alpha, beta, lambda};
}

// Derived exponents: the admissible input interval (p_minus, p_plus), the
// output endpoints q_minus, q_plus (q_plus = +inf when beta = 0), and the
// endpoint blow-up exponent kappa = (alpha+beta+lambda)/d.
struct ExponentChart {
  RieszParams params;
  double p_minus = 1.0;
  double p_plus = 1.0;
  double q_minus = 1.0;
  double q_plus = kInf;
  double kappa = 0.0;
};

inline ExponentChart exponent_chart(const RieszParams& pr) {
  ExponentChart c;
  c.params = pr;
  double d = static_cast<double>(pr.d);
  c.p_minus = d / (d - pr.alpha);
  c.p_plus = d / (d - pr.alpha - pr.lambda);
  c.q_minus = d / (pr.beta + pr.lambda);
  c.q_plus = (pr.beta == 0.0) ? kInf : d / pr.beta;
  c.kappa = pr.exponent_sum() / d;
  return c;
}

// A point (p, q) on the conjugate line 1 + 1/q = 1/p + kappa, with the dual
// index l = q/(q-1) of the pairing partner.
struct GPoint {
  double p = 0.0;
  double q = 0.0;
  double q_dual = 0.0;
};

inline GPoint conjugate_q(const ExponentChart& chart, double p) {
  if (!(p > chart.p_minus && p < chart.p_plus))
    throw OutOfRangeError("p outside (p_minus, p_plus): operator norm diverges there");
  double inv_q = 1.0 / p + chart.kappa - 1.0;
  double q = 1.0 / inv_q;
  return GPoint{p, q, q / (q - 1.0)};
}

// True iff (p,q) lies on the line G within relative tolerance 1e-12 and
// p is strictly inside the admissible interval.
inline bool in_G(const RieszParams& pr, double p, double q, double rel_tol = 1e-12) {
  ExponentChart chart = exponent_chart(pr);
  if (!(p > chart.p_minus && p < chart.p_plus)) return false;
  double lhs = 1.0 + 1.0 / q;
  double rhs = 1.0 / p + chart.kappa;
  return std::abs(lhs - rhs) <= rel_tol * std::abs(rhs);
}

}  // namespace riesz
