#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "riesz/errors.hpp"
#include "riesz/exponents.hpp"
#include "riesz/math_util.hpp"
#include "riesz/profile.hpp"

namespace riesz {

// Independent full-dimensional Monte Carlo evaluation of the potential and the
// bilinear functional for d <= 3. This is the brute-force cross-check of the
// radial reduction; it shares no quadrature code with the radial path.

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
  long long n_samples = 0;
  uint64_t seed = 0;
};

namespace mc_detail {

inline constexpr int kBlock = 8192;

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// cos of the angle between a uniform direction on S^{d-1} and a fixed axis.
inline double random_cos_angle(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  if (d == 1) return uni(rng) < 0.5 ? -1.0 : 1.0;
  if (d == 2) return std::cos(2.0 * kPi * uni(rng));
  return 2.0 * uni(rng) - 1.0;  // d == 3: cos uniform on [-1, 1]
}

// One radial proposal component: density rho(s) proportional to s^{k-1} on
// (lo, hi), with k != 0 (k < 0 requires hi = inf, k > 0 requires finite
// normalization). k == 0 means log-uniform on a finite (lo, hi).
struct RadialProposal {
  double lo = 0.0, hi = kInf;
  double k = 0.0;
  double log_norm = 0.0;  // log of the normalizing constant of s^{k-1}

  // Radial density value at s (0 outside the support).
  double density(double s) const {
    if (!(s > lo && s < hi)) return 0.0;
    if (k == 0.0) return 1.0 / (s * std::log(hi / lo));
    return std::exp(log_norm + (k - 1.0) * std::log(s));
  }

  double sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    if (u <= 0.0) u = 0.5;
    if (k == 0.0) return lo * std::pow(hi / lo, u);
    if (k > 0.0) {
      double lk = (lo > 0.0) ? std::pow(lo, k) : 0.0;
      return std::pow(lk + u * (std::pow(hi, k) - lk), 1.0 / k);
    }
    return lo * std::pow(u, 1.0 / k);  // k < 0, hi = inf
  }
};

// Proposal mixture over a profile's pieces for the integral
// \int f(s) s^{m} s^{d-1} (kernel) ds: one power-law component per piece with
// exponent chosen so the component dominates the integrand near the piece's
// singular edge. m is the weight exponent (-alpha), lam the kernel decay used
// for infinite tails.
inline std::vector<RadialProposal> piece_proposals(const RadialProfile& f, int d, double m,
                                                   double lam) {
  std::vector<RadialProposal> out;
  for (const auto& pc : f.pieces) {
    if (pc.coef == 0.0) continue;
    RadialProposal rp;
    rp.lo = pc.r_lo;
    rp.hi = pc.r_hi;
    double k = pc.power + m + static_cast<double>(d);
    if (std::isinf(pc.r_hi)) k -= lam;
    if (std::abs(k) < 1e-9 && pc.r_lo > 0.0 && !std::isinf(pc.r_hi)) {
      rp.k = 0.0;
    } else {
      if (std::isinf(pc.r_hi) && !(k < 0.0))
        throw DivergentNormError("mc proposal: nonintegrable tail");
      if (pc.r_lo <= 0.0 && !(k > 0.0))
        throw DivergentNormError("mc proposal: nonintegrable head");
      rp.k = k;
      double mass;  // \int_lo^hi s^{k-1} ds
      if (std::isinf(pc.r_hi))
        mass = -std::pow(pc.r_lo, k) / k;
      else
        mass = (std::pow(pc.r_hi, k) - (pc.r_lo > 0.0 ? std::pow(pc.r_lo, k) : 0.0)) / k;
      rp.log_norm = -std::log(mass);
    }
    out.push_back(rp);
  }
  if (out.empty()) throw Error("mc proposal: empty profile");
  return out;
}

// Ball proposal around x: z = x - y with density proportional to |z|^{-lam}
// on |z| < T; covers the kernel singularity at y = x.
struct BallProposal {
  double T = 0.0;
  int d = 1;
  double lam = 0.0;

  double radial_density(double t) const {
    // density of t = |z| on (0, T): (d-lam) t^{d-lam-1} / T^{d-lam}
    if (!(t > 0.0 && t < T)) return 0.0;
    double e = static_cast<double>(d) - lam;
    return e * std::pow(t, e - 1.0) / std::pow(T, e);
  }

  double sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    if (u <= 0.0) u = 0.5;
    return T * std::pow(u, 1.0 / (static_cast<double>(d) - lam));
  }
};

struct BlockSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Run blocks [0, n_blocks) of a per-sample kernel, deterministically seeded,
// optionally in parallel; partial sums are combined in block order.
template <class SampleFn>
McEstimate run_blocks(long long n, uint64_t seed, int threads, SampleFn&& one_sample) {
  long long n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<BlockSums> blocks(static_cast<size_t>(n_blocks));
  auto work = [&](long long b0, long long b1) {
    for (long long b = b0; b < b1; ++b) {
      std::mt19937_64 rng(splitmix64(seed + 0x1000003ull * static_cast<uint64_t>(b)));
      double s = 0.0, s2 = 0.0;
      for (int i = 0; i < kBlock; ++i) {
        double w = one_sample(rng);
        s += w;
        s2 += w * w;
      }
      blocks[static_cast<size_t>(b)] = {s, s2};
    }
  };
  if (threads <= 1 || n_blocks == 1) {
    work(0, n_blocks);
  } else {
    int nt = std::min<long long>(threads, n_blocks);
    std::vector<std::thread> pool;
    long long per = (n_blocks + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
      long long b0 = t * per, b1 = std::min(n_blocks, b0 + per);
      if (b0 < b1) pool.emplace_back(work, b0, b1);
    }
    for (auto& th : pool) th.join();
  }
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& b : blocks) {
    sum += b.sum;
    sum_sq += b.sum_sq;
  }
  McEstimate est;
  est.n_samples = n_blocks * kBlock;
  est.seed = seed;
  double nn = static_cast<double>(est.n_samples);
  est.value = sum / nn;
  double var = std::max(0.0, sum_sq / nn - est.value * est.value);
  est.std_err = std::sqrt(var / nn);
  return est;
}

}  // namespace mc_detail

// Unbiased importance-sampled estimate of
// |x|^{-beta} \int f(y) |y|^{-alpha} |x-y|^{-lambda} dy at |x| = x_norm.
inline McEstimate potential_at_point_mc(const RieszParams& pr, const RadialProfile& f,
                                        double x_norm, long long n, uint64_t seed,
                                        int threads = 1) {
  if (pr.d > 3) throw UnsupportedDimension("potential_at_point_mc: d <= 3 only");
  if (!(x_norm > 0.0)) throw OutOfRangeError("potential_at_point_mc: need |x| > 0");
  if (f.is_zero()) return McEstimate{0.0, 0.0, n, seed};
  using namespace mc_detail;
  auto radial = piece_proposals(f, pr.d, -pr.alpha, pr.lambda);
  BallProposal ball{x_norm, pr.d, pr.lambda};
  size_t nr = radial.size();
  // Mixture: half the mass on the ball component, half spread over pieces.
  double w_ball = 0.5;
  double w_piece = 0.5 / static_cast<double>(nr);
  double omega = sphere_surface(pr.d);
  double r = x_norm;
  double prefac = std::pow(r, -pr.beta);

  auto one_sample = [&, radial, ball](std::mt19937_64& rng) -> double {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double pick = uni(rng);
    double s, w;  // |y| and |x-y|
    if (pick < w_ball) {
      double t = ball.sample(rng);
      double c = random_cos_angle(pr.d, rng);
      s = std::sqrt(std::max(0.0, r * r + t * t - 2.0 * r * t * c));
      w = t;
    } else {
      size_t j = std::min(nr - 1, static_cast<size_t>((pick - w_ball) / w_piece));
      s = radial[j].sample(rng);
      double c = random_cos_angle(pr.d, rng);
      w = std::sqrt(std::max(0.0, r * r + s * s - 2.0 * r * s * c));
    }
    if (!(s > 0.0) || !(w > 0.0)) return 0.0;
    double fv = f.eval(s);
    if (fv == 0.0) return 0.0;
    // Mixture density at y, as a d-dimensional density.
    double dens = 0.0;
    for (const auto& rp : radial) dens += w_piece * rp.density(s);
    dens /= (omega * std::pow(s, pr.d - 1.0));
    double bd = ball.radial_density(w);
    if (bd > 0.0) dens += w_ball * bd / (omega * std::pow(w, pr.d - 1.0));
    if (!(dens > 0.0)) return 0.0;
    double integrand = fv * std::pow(s, -pr.alpha) * std::pow(w, -pr.lambda);
    return prefac * integrand / dens;
  };
  return run_blocks(n, seed, threads, one_sample);
}

// Unbiased estimate of B(f, g) = \int\int g(x)|x|^{-beta} f(y)|y|^{-alpha}
// |x-y|^{-lambda} dy dx: outer radial sampler for x over g's pieces, inner
// sampler as in potential_at_point_mc.
inline McEstimate bilinear_mc(const RieszParams& pr, const RadialProfile& f,
                              const RadialProfile& g, long long n, uint64_t seed,
                              int threads = 1) {
  if (pr.d > 3) throw UnsupportedDimension("bilinear_mc: d <= 3 only");
  if (f.is_zero() || g.is_zero()) return McEstimate{0.0, 0.0, n, seed};
  using namespace mc_detail;
  auto outer = piece_proposals(g, pr.d, -pr.beta, pr.lambda);
  auto inner = piece_proposals(f, pr.d, -pr.alpha, pr.lambda);
  size_t no = outer.size(), ni = inner.size();
  double w_ball = 0.5;
  double w_piece = 0.5 / static_cast<double>(ni);
  double omega = sphere_surface(pr.d);

  auto one_sample = [&, outer, inner](std::mt19937_64& rng) -> double {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    // outer draw (uniform over outer components)
    size_t jo = std::min(no - 1, static_cast<size_t>(uni(rng) * no));
    double r = outer[jo].sample(rng);
    if (!(r > 0.0)) return 0.0;
    double gv = g.eval(r);
    double dens_x = 0.0;
    for (const auto& rp : outer) dens_x += rp.density(r) / static_cast<double>(no);
    dens_x /= (omega * std::pow(r, pr.d - 1.0));
    if (gv == 0.0 || !(dens_x > 0.0)) return 0.0;
    // inner draw
    BallProposal ball{r, pr.d, pr.lambda};
    double pick = uni(rng);
    double s, w;
    if (pick < w_ball) {
      double t = ball.sample(rng);
      double c = random_cos_angle(pr.d, rng);
      s = std::sqrt(std::max(0.0, r * r + t * t - 2.0 * r * t * c));
      w = t;
    } else {
      size_t j = std::min(ni - 1, static_cast<size_t>((pick - w_ball) / w_piece));
      s = inner[j].sample(rng);
      double c = random_cos_angle(pr.d, rng);
      w = std::sqrt(std::max(0.0, r * r + s * s - 2.0 * r * s * c));
    }
    if (!(s > 0.0) || !(w > 0.0)) return 0.0;
    double fv = f.eval(s);
    if (fv == 0.0) return 0.0;
    double dens_y = 0.0;
    for (const auto& rp : inner) dens_y += w_piece * rp.density(s);
    dens_y /= (omega * std::pow(s, pr.d - 1.0));
    double bd = ball.radial_density(w);
    if (bd > 0.0) dens_y += w_ball * bd / (omega * std::pow(w, pr.d - 1.0));
    if (!(dens_y > 0.0)) return 0.0;
    double integrand = gv * std::pow(r, -pr.beta) * fv * std::pow(s, -pr.alpha) *
                       std::pow(w, -pr.lambda);
    return integrand / (dens_x * dens_y);
  };
  return run_blocks(n, seed, threads, one_sample);
}

}  // namespace riesz
