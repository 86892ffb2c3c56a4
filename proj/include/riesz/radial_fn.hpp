#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/math_util.hpp"
#include "riesz/profile.hpp"

namespace riesz {

// Analytic head/tail behavior: sign_amp * exp(log_amp) * r^power * (dir*log r + shift)^log_exp.
// The amplitude is kept in log form so extreme powers (power-method iterates at
// large q) degrade to 0 instead of overflowing.
struct AsymptoticForm {
  double log_amp = -kInf;
  double sign_amp = 1.0;
  double power = 0.0;
  double log_exp = 0.0;  // real exponent, >= 0
  double shift = 0.0;
  double dir = 1.0;  // +1: tail form (log r + shift), -1: head form (-log r + shift)

  bool zero() const { return std::isinf(log_amp) && log_amp < 0.0; }

  double eval(double r) const {
    if (zero()) return 0.0;
    double L = dir * std::log(r) + shift;
    if (L < 0.0) L = 0.0;
    double lg = log_amp + power * std::log(r);
    if (log_exp > 0.0) {
      if (L <= 0.0) return 0.0;
      lg += log_exp * std::log(L);
    }
    if (lg < -745.0) return 0.0;
    return sign_amp * std::exp(lg);
  }

  // Pointwise power: (this)^e for e > 0 (assumes sign_amp > 0).
  AsymptoticForm pow(double e) const {
    AsymptoticForm out = *this;
    if (!zero()) out.log_amp = log_amp * e;
    out.power = power * e;
    out.log_exp = log_exp * e;
    return out;
  }
};

// One smooth segment of a radial function on (lo, hi).
struct Segment {
  double lo = 0.0, hi = kInf;
  bool is_asym = false;
  // Power-log branch: sign * exp(log_coef) * r^power * (log r)^ilog
  double sign = 1.0;
  double log_coef = -kInf;
  double power = 0.0;
  int ilog = 0;
  // Asymptotic branch:
  AsymptoticForm asym;

  double eval(double r) const {
    if (is_asym) return asym.eval(r);
    if (std::isinf(log_coef) && log_coef < 0.0) return 0.0;
    double lg = log_coef + power * std::log(r);
    double v = (lg < -745.0) ? 0.0 : std::exp(lg);
    if (ilog > 0) v *= std::pow(std::log(r), ilog);
    return sign * v;
  }
};

// A radial function as ordered disjoint smooth segments. Everything the radial
// integrator consumes is reduced to this form.
struct RadialFn {
  std::vector<Segment> segs;

  double eval(double r) const {
    // Segments are ordered and disjoint; linear scan is fine at our sizes for
    // profiles, binary search for sampled functions.
    size_t n = segs.size();
    if (n == 0) return 0.0;
    size_t a = 0, b = n;
    while (a < b) {
      size_t mid = (a + b) / 2;
      if (segs[mid].hi <= r)
        a = mid + 1;
      else
        b = mid;
    }
    if (a < n && r > segs[a].lo && r < segs[a].hi) return segs[a].eval(r);
    return 0.0;
  }

  double support_lo() const { return segs.empty() ? 0.0 : segs.front().lo; }
  double support_hi() const { return segs.empty() ? 0.0 : segs.back().hi; }
};

inline RadialFn to_radial_fn(const RadialProfile& f) {
  RadialFn fn;
  for (const auto& pc : f.pieces) {
    if (pc.coef == 0.0) continue;
    Segment s;
    s.lo = pc.r_lo;
    s.hi = pc.r_hi;
    s.sign = (pc.coef < 0.0) ? -1.0 : 1.0;
    s.log_coef = std::log(std::abs(pc.coef));
    s.power = pc.power;
    s.ilog = pc.log_power;
    fn.segs.push_back(s);
  }
  std::sort(fn.segs.begin(), fn.segs.end(),
            [](const Segment& a, const Segment& b) { return a.lo < b.lo; });
  return fn;
}

// \int seg(s) s^m ds over [lo, hi] (clipped to the segment), by antiderivative.
// Used for the far-field regions where the kernel is replaced by its power
// asymptotics; must converge at 0 / infinity when the range touches them.
inline double segment_weighted_power_integral(const Segment& seg, double m, double lo, double hi) {
  lo = std::max(lo, seg.lo);
  hi = std::min(hi, seg.hi);
  if (!(hi > lo)) return 0.0;
  if (seg.is_asym) {
    const AsymptoticForm& a = seg.asym;
    if (a.zero()) return 0.0;
    double lg = a.log_amp +
                log_pow_logshift_integral(a.power + m, a.log_exp, a.dir, a.shift, lo, hi);
    return std::isinf(lg) && lg < 0.0 ? 0.0 : a.sign_amp * std::exp(lg);
  }
  if (std::isinf(seg.log_coef) && seg.log_coef < 0.0) return 0.0;
  double e = seg.power + m;
  if (seg.ilog == 0) {
    double k = e + 1.0;
    if (std::abs(k) < 1e-14) {
      if (lo <= 0.0 || std::isinf(hi))
        throw DivergentNormError("segment integral divergent (critical exponent)");
      return seg.sign * std::exp(seg.log_coef) * (std::log(hi) - std::log(lo));
    }
    double upper, lower;
    if (std::isinf(hi)) {
      if (k > 0.0) throw DivergentNormError("segment integral divergent at infinity");
      upper = -kInf;
    } else {
      upper = seg.log_coef + k * std::log(hi);
    }
    if (lo <= 0.0) {
      if (k < 0.0) throw DivergentNormError("segment integral divergent at zero");
      lower = -kInf;
    } else {
      lower = seg.log_coef + k * std::log(lo);
    }
    return seg.sign * exp_diff(upper, lower) / k;
  }
  return seg.sign * std::exp(seg.log_coef) * powlog_integral(e, seg.ilog, lo, hi);
}

// L_p norm of a radial function in R^d (omega_{d-1} \int |f|^p r^{d-1} dr)^{1/p},
// fully analytic per segment. Segments with integer log powers are split at
// r = 1 so |log r|^{p b} stays one-signed.
inline double lp_norm_radial_fn(const RadialFn& fn, double p, int d) {
  double acc = 0.0;      // scaled by exp(-p*scale)
  double scale = -kInf;  // running log scale
  auto add_log = [&](double lg) {
    // accumulate exp(lg - p*scale) with rescaling
    if (std::isinf(lg) && lg < 0.0) return;
    if (lg > scale * p) {
      if (!std::isinf(scale)) acc *= std::exp(p * scale - lg);
      if (acc < 1e-305) acc = 0.0;
      scale = lg / p;
      acc += 1.0;
    } else {
      acc += std::exp(lg - p * scale);
    }
  };
  for (const auto& seg : fn.segs) {
    if (seg.is_asym) {
      const AsymptoticForm& a = seg.asym;
      if (a.zero()) continue;
      double lg = p * a.log_amp + log_pow_logshift_integral(a.power * p + d - 1.0,
                                                            a.log_exp * p, a.dir, a.shift,
                                                            seg.lo, seg.hi);
      add_log(lg);
      continue;
    }
    if (std::isinf(seg.log_coef) && seg.log_coef < 0.0) continue;
    double e = seg.power * p + d - 1.0;
    double nu = static_cast<double>(seg.ilog) * p;
    if (seg.ilog == 0) {
      double k = e + 1.0;
      double lo = seg.lo, hi = seg.hi;
      if (std::abs(k) < 1e-14) {
        if (lo <= 0.0 || std::isinf(hi)) throw DivergentNormError("norm divergent");
        add_log(p * seg.log_coef + std::log(std::log(hi / lo)));
      } else {
        if (std::isinf(hi) && k > 0.0) throw DivergentNormError("norm divergent at infinity");
        if (lo <= 0.0 && k < 0.0) throw DivergentNormError("norm divergent at zero");
        // Stay in log form: p*log_coef alone can exceed the exp range even
        // though the norm itself (after the 1/p root) is moderate.
        double lc = p * seg.log_coef;
        double upper = std::isinf(hi) ? -kInf : lc + k * std::log(hi);
        double lower = (lo <= 0.0) ? -kInf : lc + k * std::log(lo);
        if (upper != lower) {
          double lg = (k > 0.0) ? log_exp_diff(upper, lower) - std::log(k)
                                : log_exp_diff(lower, upper) - std::log(-k);
          add_log(lg);
        }
      }
      continue;
    }
    // |log r|^{p b}: split at 1.
    double one = 1.0;
    if (seg.lo < one && seg.hi > one) {
      add_log(p * seg.log_coef + log_pow_logshift_integral(e, nu, -1.0, 0.0, seg.lo, one));
      add_log(p * seg.log_coef + log_pow_logshift_integral(e, nu, +1.0, 0.0, one, seg.hi));
    } else if (seg.hi <= one) {
      add_log(p * seg.log_coef + log_pow_logshift_integral(e, nu, -1.0, 0.0, seg.lo, seg.hi));
    } else {
      add_log(p * seg.log_coef + log_pow_logshift_integral(e, nu, +1.0, 0.0, seg.lo, seg.hi));
    }
  }
  if (acc <= 0.0) return 0.0;
  return std::exp(scale + std::log(sphere_surface(d) * acc) / p);
}

}  // namespace riesz
