#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "riesz/config.hpp"
#include "riesz/errors.hpp"
#include "riesz/math_util.hpp"

namespace riesz {

// Angular kernel Phi_{lambda,d}(r,s) = \int_{S^{d-1}} |r e_1 - s w|^{-lambda} dsigma(w).
// On radial inputs it reduces the d-dimensional potential to a 1-D integral:
//   I f(x) = |x|^{-beta} \int_0^inf H(s) s^{-alpha} s^{d-1} Phi(|x|, s) ds.

// Local blow-up exponent of Phi near the diagonal r = s: |r-s|^{d-1-lambda}
// when lambda > d-1, a log singularity at lambda = d-1 (reported as 0), and
// bounded (0) below.
inline double kernel_diagonal_exponent(int d, double lambda) {
  if (!(lambda < d)) throw OutOfRangeError("kernel_diagonal_exponent: need lambda < d");
  return std::min(0.0, static_cast<double>(d - 1) - lambda);
}

// Coefficient K of the near-diagonal law Phi(r,s) ~ K (rs)^{-(d-1)/2} |r-s|^{d-1-lambda},
// valid for lambda > d-1.
inline double diagonal_coefficient(int d, double lambda) {
  if (!(lambda > d - 1 && lambda < d))
    throw OutOfRangeError("diagonal_coefficient: need d-1 < lambda < d");
  if (d == 1) return 1.0;
  double sigma = 2.0 * std::pow(kPi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1));
  // (1/2) B((d-1)/2, (lambda-d+1)/2)
  double lb = std::lgamma(0.5 * (d - 1)) + std::lgamma(0.5 * (lambda - d + 1)) -
              std::lgamma(0.5 * lambda);
  return sigma * 0.5 * std::exp(lb);
}

namespace detail {

// Phi(rho, 1) for d >= 2 by adaptive quadrature in theta over [0, pi], with
// panels geometrically accumulating toward theta = 0 where the integrand
// concentrates when rho ~ 1. rho_m1 = rho - 1 supplied separately so the
// near-diagonal distance never suffers cancellation.
inline double phi_theta_quad(int d, double lambda, double rho, double rho_m1, double rel_tol,
                             int max_panels) {
  double sigma = 2.0 * std::pow(kPi, 0.5 * (d - 1)) / std::tgamma(0.5 * (d - 1));
  double a2 = rho_m1 * rho_m1;
  auto integrand = [&](double th) {
    double sh = std::sin(0.5 * th);
    double A = a2 + 4.0 * rho * sh * sh;
    double v = std::pow(A, -0.5 * lambda);
    if (d > 2) v *= std::pow(std::sin(th), d - 2);
    return v;
  };
  double acc = 0.0, prev = 0.0;
  double hi = kPi;
  int k = 0;
  double contrib = 0.0;
  for (; k < max_panels; ++k) {
    double lo = hi * 0.5;
    contrib = gl16_panel(integrand, lo, hi);
    acc += contrib;
    if (k >= 6 && std::abs(contrib) < 0.05 * rel_tol * std::abs(acc) && contrib < prev) break;
    prev = contrib;
    hi = lo;
  }
  // Geometric remainder estimate for the untouched sliver near theta = 0.
  if (prev > 0.0 && contrib > 0.0 && contrib < prev) {
    double ratio = contrib / prev;
    if (ratio < 0.95) acc += contrib * ratio / (1.0 - ratio);
  }
  return sigma * acc;
}

// Phi(rho, 1), d = 1: the two-point sphere {-1, +1}.
inline double phi_d1(double lambda, double rho_m1, double rho) {
  return std::pow(std::abs(rho_m1), -lambda) + std::pow(rho + 1.0, -lambda);
}

// Phi(rho, 1), d = 3 closed form, written so that no cancellation occurs for
// rho far from 1:  2 pi ((rho+1)^{2-l} - |rho-1|^{2-l}) / (rho (2-l)).
inline double phi_d3(double lambda, double rho_m1, double rho) {
  double A = std::abs(rho_m1), B = rho + 1.0;
  if (lambda == 2.0) return 2.0 * kPi * std::log(B / A) / rho;
  double eps = 2.0 - lambda;
  double diff;
  if (A == 0.0)
    diff = std::pow(B, eps);
  else
    diff = std::pow(A, eps) * std::expm1(eps * std::log(B / A));
  return 2.0 * kPi * diff / (rho * eps);
}

}  // namespace detail

// Phi(e^t, 1) with t = log(r/s). Production paths: closed forms for d = 1 and
// d = 3, theta-quadrature otherwise.
inline double phi_log_ratio(int d, double lambda, double t,
                            const AngularKernelConfig& cfg = {}) {
  double rho = std::exp(t);
  double rho_m1 = std::expm1(t);
  if (rho_m1 == 0.0 && lambda >= d - 1)
    throw SingularArgumentError("angular kernel singular on the diagonal for lambda >= d-1");
  if (d == 1) return detail::phi_d1(lambda, rho_m1, rho);
  if (d == 3) return detail::phi_d3(lambda, rho_m1, rho);
  return detail::phi_theta_quad(d, lambda, rho, rho_m1, cfg.theta_rel_tol, cfg.max_panels);
}

// Full kernel Phi(r, s) = s^{-lambda} Phi(r/s, 1); handles the s = 0 / r = 0
// collapse Phi = omega_{d-1} max(r,s)^{-lambda}.
inline double angular_kernel(int d, double lambda, double r, double s,
                             const AngularKernelConfig& cfg = {}) {
  if (!(lambda < d) || !(lambda > 0.0)) throw OutOfRangeError("angular_kernel: need 0 < lambda < d");
  if (r < 0.0 || s < 0.0) throw OutOfRangeError("angular_kernel: radii must be >= 0");
  if (r == 0.0 && s == 0.0)
    throw SingularArgumentError("angular_kernel: r = s = 0 is singular");
  if (r == 0.0 || s == 0.0)
    return sphere_surface(d) * std::pow(std::max(r, s), -lambda);
  if (r == s && lambda >= d - 1)
    throw SingularArgumentError("angular_kernel: diagonal nonintegrable for lambda >= d-1");
  return std::pow(s, -lambda) * phi_log_ratio(d, lambda, std::log(r / s), cfg);
}

// Memo table for phi_log_ratio keyed on the exact bit pattern of t. The radial
// integrator arranges its nodes so that structurally-equal offsets produce
// bit-identical t values, which keeps the table small (homogeneity already
// removed the overall scale).
class KernelCache {
 public:
  KernelCache(int d, double lambda, AngularKernelConfig cfg = {})
      : d_(d), lambda_(lambda), cfg_(cfg) {}

  int d() const { return d_; }
  double lambda() const { return lambda_; }

  double phi(double t) {
    uint64_t key = std::bit_cast<uint64_t>(t);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    double v = phi_log_ratio(d_, lambda_, t, cfg_);
    table_.emplace(key, v);
    return v;
  }

  size_t size() const { return table_.size(); }

 private:
  int d_;
  double lambda_;
  AngularKernelConfig cfg_;
  std::unordered_map<uint64_t, double> table_;
};

}  // namespace riesz
