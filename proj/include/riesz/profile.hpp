#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riesz/config.hpp"
#include "riesz/errors.hpp"
#include "riesz/exponents.hpp"
#include "riesz/math_util.hpp"

namespace riesz {

// One piece of a radial function: coef * r^power * (log r)^log_power on the
// open interval (r_lo, r_hi), zero outside. Boundary points carry no measure,
// so supports are read strictly (matching the strict indicators I(|x|>1) etc.).
struct PowerLogPiece {
  double coef = 0.0;
  double power = 0.0;
  int log_power = 0;
  double r_lo = 0.0;
  double r_hi = kInf;

  double eval(double r) const {
    if (!(r > r_lo && r < r_hi)) return 0.0;
    double v = coef * std::pow(r, power);
    if (log_power > 0) v *= std::pow(std::log(r), log_power);
    return v;
  }
};

// A radial function H(|x|) as an ordered list of pieces with pairwise
// disjoint supports (gaps are allowed and mean zero).
struct RadialProfile {
  std::vector<PowerLogPiece> pieces;
  std::string label;

  double eval(double r) const {
    double v = 0.0;
    for (const auto& pc : pieces) v += pc.eval(r);
    return v;
  }

  bool is_zero() const {
    for (const auto& pc : pieces)
      if (pc.coef != 0.0) return false;
    return true;
  }
};

inline RadialProfile make_f0(const RieszParams& pr) {
  RadialProfile f;
  f.label = "f0";
  f.pieces.push_back({1.0, -(pr.d - pr.alpha), 0, 1.0, kInf});
  return f;
}

inline RadialProfile make_g0(const RieszParams& pr) {
  RadialProfile f;
  f.label = "g0";
  f.pieces.push_back({1.0, -(pr.d - pr.alpha - pr.lambda), 0, 0.0, 1.0});
  return f;
}

inline RadialProfile make_h(const RieszParams& pr) {
  RadialProfile f;
  f.label = "h";
  f.pieces.push_back({1.0, -(pr.d - pr.alpha - pr.lambda), 0, 0.0, 1.0});
  f.pieces.push_back({1.0, -(pr.d - pr.alpha), 0, 1.0, kInf});
  return f;
}

// f_t(x) := f(t x). Each piece maps to support (r_lo/t, r_hi/t) and the
// (log(tr))^b factor expands binomially into log powers 0..b.
inline RadialProfile dilate(const RadialProfile& f, double t) {
  if (!(t > 0.0)) throw SignError("dilate: t must be > 0");
  RadialProfile out;
  out.label = f.label + "_dilated";
  double lt = std::log(t);
  for (const auto& pc : f.pieces) {
    double base = pc.coef * std::pow(t, pc.power);
    double lo = pc.r_lo / t;
    double hi = std::isinf(pc.r_hi) ? kInf : pc.r_hi / t;
    if (pc.log_power == 0) {
      out.pieces.push_back({base, pc.power, 0, lo, hi});
      continue;
    }
    double binom = 1.0;
    for (int j = pc.log_power; j >= 0; --j) {
      // C(b, j) * (log t)^{b-j}
      double c = base * binom * std::pow(lt, pc.log_power - j);
      if (c != 0.0) out.pieces.push_back({c, pc.power, j, lo, hi});
      binom = binom * j / (pc.log_power - j + 1.0);
    }
  }
  return out;
}

inline RadialProfile scale(const RadialProfile& f, double c) {
  RadialProfile out = f;
  for (auto& pc : out.pieces) pc.coef *= c;
  return out;
}

// ---------------------------------------------------------------------------
// Integrability. A power r^s near 0 is p-integrable (against r^{d-1} dr) iff
// sp + d > 0; near infinity iff sp + d < 0. Log factors do not change strict
// verdicts; the marginal equality cases diverge.

inline bool piece_in_Lp(const PowerLogPiece& pc, double p, int d) {
  if (pc.coef == 0.0) return true;
  double e = pc.power * p + d;
  if (pc.r_lo <= 0.0 && e <= 0.0) return false;
  if (std::isinf(pc.r_hi) && e >= 0.0) return false;
  return true;
}

inline bool in_Lp(const RadialProfile& f, double p, const RieszParams& pr) {
  for (const auto& pc : f.pieces)
    if (!piece_in_Lp(pc, p, pr.d)) return false;
  return true;
}

// Membership in L(a,b) = intersection of L_p over p in (a,b), decided
// analytically from the piece exponents.
inline bool in_L_interval(const RadialProfile& f, double a, double b, const RieszParams& pr) {
  if (!(a >= 1.0 && a < b)) throw OutOfRangeError("in_L_interval: need 1 <= a < b");
  // the limiting exponents are open-interval conditions; the tolerance keeps
  // exactly-marginal edge laws (like f0 at p_-) from being rejected by the
  // rounding of a and b
  double tol = 1e-9 * pr.d;
  for (const auto& pc : f.pieces) {
    if (pc.coef == 0.0) continue;
    if (pc.r_lo <= 0.0 && pc.power < 0.0) {
      // need power*p + d > 0 for all p in (a,b); worst case p -> b
      if (std::isinf(b) || pc.power * b + pr.d < -tol) return false;
    }
    if (std::isinf(pc.r_hi)) {
      // need power*p + d < 0 for all p in (a,b); worst case p -> a
      if (pc.power * a + pr.d > tol) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Norms.

// Exact L_p norm by antiderivatives; restricted to pure-power pieces.
// Returns nullopt when the integral diverges.
inline std::optional<double> lp_norm_closed(const RadialProfile& f, double p,
                                            const RieszParams& pr) {
  if (p < 1.0) throw OutOfRangeError("lp_norm_closed: p must be >= 1");
  for (const auto& pc : f.pieces)
    if (pc.log_power > 0)
      throw UnsupportedForm("lp_norm_closed: log-power pieces not supported in closed form");
  double acc = 0.0;
  for (const auto& pc : f.pieces) {
    if (pc.coef == 0.0) continue;
    if (!piece_in_Lp(pc, p, pr.d)) return std::nullopt;
    acc += std::pow(std::abs(pc.coef), p) *
           powlog_integral(pc.power * p + pr.d - 1.0, 0, pc.r_lo, pc.r_hi);
  }
  return std::pow(sphere_surface(pr.d) * acc, 1.0 / p);
}

// L_p norm by Gauss-Legendre panels on a geometric subdivision, with the
// head/tail contributions beyond [r_min, r_max] taken analytically from the
// piece exponents.
inline double lp_norm_quad(const RadialProfile& f, double p, const RieszParams& pr,
                           const QuadratureConfig& cfg) {
  if (p < 1.0) throw OutOfRangeError("lp_norm_quad: p must be >= 1");
  if (!in_Lp(f, p, pr)) throw DivergentNormError("lp_norm_quad: profile not in L_p");
  double acc = 0.0;
  double panel_w = std::log(10.0) / cfg.points_per_decade;
  // Beyond the grid, per-piece analytic integrals. Pieces reaching past the
  // grid are edge laws and are assumed not to overlap out there.
  for (const auto& pc : f.pieces) {
    if (pc.coef == 0.0) continue;
    double cp = std::pow(std::abs(pc.coef), p);
    double e = pc.power * p + pr.d - 1.0;
    double nu = pc.log_power * p;
    if (pc.r_lo < cfg.r_min) {
      acc += cp * pow_logshift_integral(e, nu, -1.0, 0.0, pc.r_lo,
                                        std::min(cfg.r_min, pc.r_hi));
    }
    if (pc.r_hi > cfg.r_max && cfg.r_max > pc.r_lo) {
      acc += cp * pow_logshift_integral(e, nu, +1.0, 0.0, std::max(cfg.r_max, pc.r_lo),
                                        pc.r_hi);
    }
  }
  // In-grid: pointwise quadrature of |f|^p in y = log r, with panel breaks at
  // every piece boundary so overlapping pieces (e.g. from dilate) sum
  // correctly before the p-th power is taken.
  std::vector<double> brk{std::log(cfg.r_min), std::log(cfg.r_max)};
  if (cfg.r_min < 1.0 && cfg.r_max > 1.0) brk.push_back(0.0);
  for (const auto& pc : f.pieces) {
    for (double r : {pc.r_lo, pc.r_hi})
      if (r > cfg.r_min && r < cfg.r_max) brk.push_back(std::log(r));
  }
  std::sort(brk.begin(), brk.end());
  for (size_t seg = 0; seg + 1 < brk.size(); ++seg) {
    double a = brk[seg], b = brk[seg + 1];
    if (!(b - a > 1e-14)) continue;
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / panel_w)));
    double w = (b - a) / n;
    for (int i = 0; i < n; ++i) {
      acc += gl16_panel(
          [&](double y) {
            double r = std::exp(y);
            return std::pow(std::abs(f.eval(r)), p) * std::exp(pr.d * y);
          },
          a + i * w, a + (i + 1) * w);
    }
  }
  return std::pow(sphere_surface(pr.d) * acc, 1.0 / p);
}

// ---------------------------------------------------------------------------
// JSON serialization: a list of {coef, power, log_power, r_lo, r_hi} objects
// with "inf" for an unbounded r_hi.

inline nlohmann::json to_json(const RadialProfile& f) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& pc : f.pieces) {
    nlohmann::json j{{"coef", pc.coef},
                     {"power", pc.power},
                     {"log_power", pc.log_power},
                     {"r_lo", pc.r_lo}};
    if (std::isinf(pc.r_hi))
      j["r_hi"] = "inf";
    else
      j["r_hi"] = pc.r_hi;
    arr.push_back(j);
  }
  return arr;
}

inline RadialProfile profile_from_json(const nlohmann::json& arr, std::string label = "custom") {
  if (!arr.is_array()) throw ConfigError("profile JSON must be an array of pieces");
  RadialProfile f;
  f.label = std::move(label);
  for (const auto& j : arr) {
    PowerLogPiece pc;
    pc.coef = j.at("coef").get<double>();
    pc.power = j.at("power").get<double>();
    pc.log_power = j.at("log_power").get<int>();
    if (pc.log_power < 0) throw ConfigError("log_power must be >= 0");
    pc.r_lo = j.at("r_lo").get<double>();
    const auto& hi = j.at("r_hi");
    pc.r_hi = hi.is_string() ? kInf : hi.get<double>();
    if (!(pc.r_lo >= 0.0) || !(pc.r_hi > pc.r_lo)) throw ConfigError("bad piece support");
    f.pieces.push_back(pc);
  }
  return f;
}

}  // namespace riesz
