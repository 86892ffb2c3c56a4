#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "riesz/errors.hpp"

namespace riesz {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Surface measure of the unit sphere S^{n} in R^{n+1}: 2 pi^{(n+1)/2} / Gamma((n+1)/2).
// sphere_surface(d) is the measure of S^{d-1}, i.e. omega_{d-1}.
inline double sphere_surface(int d) {
  if (d < 1) throw DimensionError("sphere_surface: d must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

// --------------------------------------------------------------------------
// Gauss-Legendre nodes on (0,1), computed once by Newton iteration on P_n.

template <int N>
struct GaussLegendre {
  std::array<double, N> node;    // abscissae mapped to (0,1)
  std::array<double, N> weight;  // weights for the unit interval

  GaussLegendre() {
    for (int i = 0; i < N; ++i) {
      // Initial guess on (-1,1), roots ordered decreasing in cos argument.
      double x = std::cos(kPi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= N; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      node[i] = 0.5 * (1.0 + x);
      weight[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

inline const GaussLegendre<16>& gl16() {
  static const GaussLegendre<16> rule;
  return rule;
}

// Integrate a callable over [a,b] with a single 16-node panel.
template <class F>
double gl16_panel(F&& f, double a, double b) {
  const auto& g = gl16();
  double w = b - a, acc = 0.0;
  for (int m = 0; m < 16; ++m) acc += g.weight[m] * f(a + w * g.node[m]);
  return acc * w;
}

// --------------------------------------------------------------------------
// Antiderivatives of s^e (log s)^b for integer b >= 0.

// Value of the antiderivative of s^e (log s)^b at s > 0.
inline double powlog_antideriv(double e, int b, double s) {
  double L = std::log(s);
  if (std::abs(e + 1.0) < 1e-300) {
    return std::pow(L, b + 1) / (b + 1);
  }
  // s^{e+1} * sum_{j=0}^{b} (-1)^{b-j} b!/j! (e+1)^{-(b-j+1)} L^j
  double k = e + 1.0;
  double sum = 0.0;
  double fac = 1.0;  // b!/j! for j = b down to 0
  double kpow = 1.0 / k;
  for (int j = b; j >= 0; --j) {
    double term = fac * kpow * std::pow(L, j);
    if ((b - j) % 2 == 1) term = -term;
    sum += term;
    fac *= j;  // (b!/j!) * j = b!/(j-1)!
    kpow /= k;
  }
  return std::pow(s, k) * sum;
}

// Definite integral of s^e (log s)^b over [lo, hi]; lo may be 0, hi may be inf,
// provided the integral converges there. Throws DivergentNormError otherwise.
inline double powlog_integral(double e, int b, double lo, double hi) {
  double upper, lower;
  if (std::isinf(hi)) {
    if (e + 1.0 >= 0.0) throw DivergentNormError("powlog_integral: divergent at infinity");
    upper = 0.0;
  } else {
    upper = powlog_antideriv(e, b, hi);
  }
  if (lo <= 0.0) {
    if (e + 1.0 <= 0.0) throw DivergentNormError("powlog_integral: divergent at zero");
    lower = 0.0;
  } else {
    lower = powlog_antideriv(e, b, lo);
  }
  return upper - lower;
}

// --------------------------------------------------------------------------
// Integrals of e^{kL} L^nu over [L1, L2], 0 <= L1 < L2 <= inf, nu >= 0.
// Requires k < 0 when L2 = inf. Backed by the upper incomplete gamma function.

inline double exp_pow_integral(double k, double nu, double L1, double L2) {
  if (nu < 0.0) throw Error("exp_pow_integral: nu must be >= 0");
  if (k == 0.0) {
    if (std::isinf(L2)) throw DivergentNormError("exp_pow_integral: divergent (k = 0)");
    return (std::pow(L2, nu + 1.0) - std::pow(L1, nu + 1.0)) / (nu + 1.0);
  }
  if (k > 0.0) {
    if (std::isinf(L2)) throw DivergentNormError("exp_pow_integral: divergent (k > 0)");
    // Reverse orientation: substitute L -> L2 - M? Not gamma-friendly; integrate
    // numerically on the finite interval (integrand smooth).
    double acc = 0.0;
    int panels = 8 + static_cast<int>(std::ceil(std::abs(k) * (L2 - L1) / 4.0));
    if (panels > 4096) panels = 4096;
    double wpan = (L2 - L1) / panels;
    for (int i = 0; i < panels; ++i) {
      double a = L1 + i * wpan;
      acc += gl16_panel([&](double L) { return std::exp(k * L) * std::pow(L, nu); }, a, a + wpan);
    }
    return acc;
  }
  double m = -k;
  double g1 = boost::math::tgamma(nu + 1.0, m * L1);
  double g2 = std::isinf(L2) ? 0.0 : boost::math::tgamma(nu + 1.0, m * L2);
  return (g1 - g2) * std::pow(m, -nu - 1.0);
}

// e^a - e^b without overflow in the difference (individual exps may still
// overflow only if the result does).
inline double exp_diff(double a, double b) {
  if (a == b) return 0.0;
  double m = std::max(a, b);
  if (m < -745.0) return 0.0;
  if (a > b) return std::exp(a) * -std::expm1(b - a);
  return -std::exp(b) * -std::expm1(a - b);
}

// log(e^a - e^b) for a > b, stable for arbitrarily large magnitudes.
inline double log_exp_diff(double a, double b) {
  if (std::isinf(b) && b < 0.0) return a;
  return a + std::log1p(-std::exp(b - a));
}

// log of exp_pow_integral, usable when the direct value would overflow
// (large nu). Requires k < 0 (or finite range), nu >= 0, 0 <= L1 < L2.
inline double log_exp_pow_integral(double k, double nu, double L1, double L2) {
  if (nu <= 120.0) {
    double v = exp_pow_integral(k, nu, L1, L2);
    if (!(v > 0.0)) return -kInf;
    if (std::isfinite(v)) return std::log(v);
  }
  // Numeric, factoring out the max of g(L) = k L + nu log L.
  auto g = [&](double L) { return k * L + (nu > 0.0 ? nu * std::log(L) : 0.0); };
  double Lpk = (k < 0.0) ? std::max(L1, std::min(std::isinf(L2) ? kInf : L2, -nu / k)) : L2;
  if (std::isinf(Lpk)) throw DivergentNormError("log_exp_pow_integral: divergent");
  if (Lpk <= 0.0) Lpk = L1 > 0.0 ? L1 : 1e-12;
  double M = g(Lpk);
  // Find an upper cutoff where the integrand is negligible.
  double U = std::isinf(L2) ? Lpk : L2;
  if (std::isinf(L2)) {
    double w = std::max(1.0, Lpk * 0.25);
    while (g(U + w) > M - 60.0) {
      U += w;
      w *= 2.0;
      if (U > 1e12) throw DivergentNormError("log_exp_pow_integral: no decay found");
    }
    U += w;
  }
  double lo = std::max(L1, 1e-300);
  int panels = 512;
  double w = (U - lo) / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    double a = lo + i * w;
    acc += gl16_panel([&](double L) { return std::exp(g(L) - M); }, a, a + w);
  }
  if (!(acc > 0.0)) return -kInf;
  return M + std::log(acc);
}

// Integral of s^e (sgn*log s + shift)^nu over [lo, hi], where the bracket must be
// positive throughout. sgn = +1 (tail-type) or -1 (head-type). lo may be 0 with
// sgn = -1; hi may be inf with sgn = +1.
inline double pow_logshift_integral(double e, double nu, double sgn, double shift, double lo,
                                    double hi) {
  if (nu == 0.0) {
    return powlog_integral(e, 0, lo, hi);
  }
  // Substitute L = sgn*log s + shift  =>  s = exp(sgn*(L - shift)),
  // ds = sgn * s dL;  s^e ds = sgn * exp((e+1) sgn (L - shift)) dL.
  double k = (e + 1.0) * sgn;
  if (sgn > 0.0) {
    double L1 = (lo <= 0.0) ? -kInf : std::log(lo) + shift;
    double L2 = std::isinf(hi) ? kInf : std::log(hi) + shift;
    if (L1 < 0.0) throw Error("pow_logshift_integral: bracket nonpositive in range");
    return std::exp(-k * shift) * exp_pow_integral(k, nu, L1, L2);
  }
  // sgn = -1: L decreasing in s; L1 corresponds to hi.
  double L1 = std::isinf(hi) ? -kInf : -std::log(hi) + shift;
  double L2 = (lo <= 0.0) ? kInf : -std::log(lo) + shift;
  if (L1 < 0.0) throw Error("pow_logshift_integral: bracket nonpositive in range");
  return std::exp(-k * shift) * exp_pow_integral(k, nu, L1, L2);
}

// log of pow_logshift_integral (integrand nonnegative in range). Returns -inf
// for a zero integral.
inline double log_pow_logshift_integral(double e, double nu, double sgn, double shift, double lo,
                                        double hi) {
  double k = (e + 1.0) * sgn;
  double L1, L2;
  if (sgn > 0.0) {
    L1 = (lo <= 0.0) ? -kInf : std::log(lo) + shift;
    L2 = std::isinf(hi) ? kInf : std::log(hi) + shift;
  } else {
    L1 = std::isinf(hi) ? -kInf : -std::log(hi) + shift;
    L2 = (lo <= 0.0) ? kInf : -std::log(lo) + shift;
  }
  if (std::isinf(L1) && L1 < 0.0) throw DivergentNormError("log_pow_logshift_integral: bad range");
  if (L1 < 0.0) throw Error("log_pow_logshift_integral: bracket nonpositive in range");
  if (L1 >= L2) return -kInf;
  return -k * shift + log_exp_pow_integral(k, nu, L1, L2);
}

// --------------------------------------------------------------------------
// Log-grid positions. Radii are represented as base * g^{k + f} with integer k
// and fractional offset f, so that log-ratios of two positions can be formed
// without cancellation and are bit-reproducible for equal index differences.

struct LogPos {
  int k = 0;       // integer grid index
  double f = 0.0;  // fractional offset in grid steps, |f| < 2
};

// log(r1/r2) in natural log units, given step h = log of the grid ratio.
inline double log_ratio(const LogPos& a, const LogPos& b, double h) {
  return (static_cast<double>(a.k - b.k) + (a.f - b.f)) * h;
}

// --------------------------------------------------------------------------
// Ordinary least squares y ~ X beta (small dense systems, normal equations).
inline std::vector<double> ols(const std::vector<std::vector<double>>& X,
                               const std::vector<double>& y) {
  size_t n = X.size(), p = X.empty() ? 0 : X[0].size();
  std::vector<std::vector<double>> A(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t a = 0; a < p; ++a) {
      b[a] += X[i][a] * y[i];
      for (size_t c = 0; c < p; ++c) A[a][c] += X[i][a] * X[i][c];
    }
  }
  // Gaussian elimination with partial pivoting.
  std::vector<double> beta(p, 0.0);
  for (size_t col = 0; col < p; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < p; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    if (std::abs(A[col][col]) < 1e-300) throw Error("ols: singular design matrix");
    for (size_t r = col + 1; r < p; ++r) {
      double m = A[r][col] / A[col][col];
      for (size_t c = col; c < p; ++c) A[r][c] -= m * A[col][c];
      b[r] -= m * b[col];
    }
  }
  for (size_t col = p; col-- > 0;) {
    double s = b[col];
    for (size_t c = col + 1; c < p; ++c) s -= A[col][c] * beta[c];
    beta[col] = s / A[col][col];
  }
  return beta;
}

}  // namespace riesz
