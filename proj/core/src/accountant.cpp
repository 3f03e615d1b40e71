// Copyright 2026 The shuffledp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shuffledp/accountant.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "shuffledp/errors.hpp"
#include "shuffledp/numerics.hpp"
#include "shuffledp/parallel.hpp"
#include "shuffledp/rng.hpp"

namespace shuffledp {

namespace {

constexpr double kZ975 = 1.959963984540054;
constexpr double kTailQuantile = 1e-12;   // per-draw loss truncation
constexpr double kWindowLogMass = 36.8;   // ln(1e16): window escape mass target
constexpr int64_t kMinPoints = int64_t{1} << 20;
constexpr int64_t kMaxPoints = int64_t{1} << 23;

struct LossParams {
  double mu = 0.0;      // lognormal location: -1/(2 sigma0^2)
  double s = 0.0;       // lognormal scale: 1/sigma0
  double e_eps = 1.0;
  double gamma = 0.0;
};

LossParams MakeLossParams(double gamma, double sigma0, double eps) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("accountant: gamma must be in (0,1]");
  }
  if (!(sigma0 > 0.0)) {
    throw std::invalid_argument("accountant: sigma0 must be > 0");
  }
  if (!(eps >= 0.0)) throw std::invalid_argument("accountant: eps must be >= 0");
  LossParams lp;
  lp.s = 1.0 / sigma0;
  lp.mu = -0.5 * lp.s * lp.s;
  lp.e_eps = std::exp(eps);
  lp.gamma = gamma;
  return lp;
}

// P(l_eps <= x) with l_eps = gamma + (1-gamma) L - e^eps, L lognormal.
double LossCdf(const LossParams& lp, double x) {
  const double a = 1.0 - lp.gamma;
  if (a == 0.0) return x >= lp.gamma - lp.e_eps ? 1.0 : 0.0;
  const double v = (x - lp.gamma + lp.e_eps) / a;
  if (v <= 0.0) return 0.0;
  return StdNormalCdf((std::log(v) - lp.mu) / lp.s);
}

double LossQuantile(const LossParams& lp, double p) {
  const double a = 1.0 - lp.gamma;
  if (a == 0.0) return lp.gamma - lp.e_eps;
  return lp.gamma + a * LognormalQuantile(lp.mu, lp.s, p) - lp.e_eps;
}

// FFTW plan creation/destruction is not thread safe; execution is.
std::mutex& FftwPlanMutex() {
  static std::mutex mu;
  return mu;
}

void FftTransform(std::vector<std::complex<double>>& buf, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(FftwPlanMutex());
    plan = fftw_plan_dft_1d(static_cast<int>(buf.size()),
                            reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(FftwPlanMutex());
    fftw_destroy_plan(plan);
  }
  if (sign == FFTW_BACKWARD) {
    const double inv = 1.0 / static_cast<double>(buf.size());
    for (auto& z : buf) z *= inv;
  }
}

void FftForward(std::vector<std::complex<double>>& buf) {
  FftTransform(buf, FFTW_FORWARD);
}

void FftInverse(std::vector<std::complex<double>>& buf) {
  FftTransform(buf, FFTW_BACKWARD);
}

int64_t NextPow2(double x) {
  int64_t p = 1;
  while (static_cast<double>(p) < x) p <<= 1;
  return p;
}

}  // namespace

void AccountantGrid::Validate() const {
  if (points < (int64_t{1} << 10)) {
    throw std::invalid_argument("AccountantGrid: points must be >= 2^10");
  }
  if ((points & (points - 1)) != 0) {
    throw std::invalid_argument("AccountantGrid: points must be a power of two");
  }
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("AccountantGrid: spacing must be > 0");
  }
  if (!(origin <= 0.0 && Top() >= 0.0)) {
    throw std::invalid_argument("AccountantGrid: grid must contain 0");
  }
}

AccountantGrid BuildDefaultGrid(int64_t n, double gamma, double sigma0,
                                double eps, int64_t points_override) {
  if (n < 1) throw std::invalid_argument("BuildDefaultGrid: n must be >= 1");
  const LossParams lp = MakeLossParams(gamma, sigma0, eps);
  const double dn = static_cast<double>(n);

  const double v_lo = LossQuantile(lp, kTailQuantile);
  const double v_hi = LossQuantile(lp, 1.0 - kTailQuantile);

  // Moments of the per-user contribution X = B * l_eps, B ~ Bernoulli(gamma).
  const double a = 1.0 - gamma;
  const double ge = gamma - lp.e_eps;
  const double mean_l = 1.0 - lp.e_eps;  // E[L] = 1
  const double el2 =
      ge * ge + 2.0 * ge * a + a * a * std::exp(lp.s * lp.s);  // E[l^2]
  const double mean_x = gamma * mean_l;
  const double var_x = std::max(gamma * el2 - mean_x * mean_x, 1e-300);
  const double mu_sum = dn * mean_x;
  const double var_sum = dn * var_x;
  const double x_max = std::max(std::fabs(v_lo), std::fabs(v_hi));

  // Bernstein-type half width: P(|S - ES| > w) <= 2 exp(-kWindowLogMass).
  const double lw = kWindowLogMass;
  const double w =
      lw * x_max / 3.0 + std::sqrt(lw * lw * x_max * x_max / 9.0 + 2.0 * lw * var_sum);

  double lo = std::max(mu_sum - w, dn * std::min(v_lo, 0.0));
  double hi = std::min(mu_sum + w, dn * std::max(v_hi, 0.0));
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  const double pad = 0.1 * (hi - lo) + 1e-12;
  lo -= pad;
  hi += pad;

  int64_t points = points_override;
  if (points == 0) {
    // Round-up discretization shifts the sum up by at most n*gamma*h; keep
    // the induced overestimate of the positive-part tail modest by holding
    // shift * |mu|/var below a small constant.
    const double slope = std::fabs(mu_sum) / var_sum;
    const double denom = std::max(dn * gamma * slope, 1e-12);
    const double h_req = 0.25 / denom;
    points = NextPow2((hi - lo) / h_req);
    points = std::clamp(points, kMinPoints, kMaxPoints);
  }

  AccountantGrid grid;
  grid.points = points;
  grid.spacing = (hi - lo) / static_cast<double>(points - 1);
  // Anchor the lattice so 0 is exactly on it.
  const int64_t k0 = static_cast<int64_t>(std::ceil(-lo / grid.spacing));
  grid.origin = -static_cast<double>(k0) * grid.spacing;
  grid.pessimism = Pessimism::kRoundUp;
  grid.Validate();
  return grid;
}

DiscretizedLoss BmgLossDistribution(double gamma, double sigma0, double eps,
                                    const AccountantGrid& grid) {
  grid.Validate();
  const LossParams lp = MakeLossParams(gamma, sigma0, eps);
  DiscretizedLoss out;
  out.grid = grid;
  out.pmf.assign(static_cast<size_t>(grid.points), 0.0);
  out.mean_exact = 1.0 - lp.e_eps;

  const double h = grid.spacing;
  const double origin = grid.origin;
  const int64_t npts = grid.points;

  if (gamma == 1.0) {
    // Degenerate: point mass at 1 - e^eps (the lognormal branch has weight 0
    // in the mixture, and l_eps is constant).
    const double v = 1.0 - lp.e_eps;
    int64_t k = static_cast<int64_t>(std::ceil((v - origin) / h));
    k = std::clamp<int64_t>(k, 0, npts - 1);
    out.pmf[static_cast<size_t>(k)] = 1.0;
    out.support_lo = out.support_hi = k;
    out.grid.lower_trunc_mass = 0.0;
    out.grid.upper_trunc_mass = 0.0;
    return out;
  }

  const double v_lo = LossQuantile(lp, kTailQuantile);
  const double v_hi = LossQuantile(lp, 1.0 - kTailQuantile);
  // A grid whose top truncates non-negligible loss mass cannot certify.
  if (LossCdf(lp, grid.Top()) < 1.0 - 1e-6) {
    throw NumericalError(
        "BmgLossDistribution: grid range does not cover the loss "
        "distribution; suggested top >= " +
        std::to_string(v_hi));
  }

  int64_t kmin = static_cast<int64_t>(std::floor((v_lo - origin) / h));
  kmin = std::clamp<int64_t>(kmin, 0, npts - 1);
  int64_t kmax = static_cast<int64_t>(std::ceil((v_hi - origin) / h));
  kmax = std::clamp<int64_t>(kmax, kmin, npts - 1);

  // Round-up: mass in (x_{k-1}, x_k] goes to x_k; everything at or below the
  // first kept lattice point is clamped up to it (pessimistic).  Mass above
  // the grid top is truncated and reported.
  double prev = LossCdf(lp, origin + static_cast<double>(kmin - 1) * h);
  const double below = prev;
  double total = 0.0;
  for (int64_t k = kmin; k <= kmax; ++k) {
    const double c = LossCdf(lp, origin + static_cast<double>(k) * h);
    const double mass = c - prev;
    out.pmf[static_cast<size_t>(k)] = mass;
    total += mass;
    prev = c;
  }
  out.pmf[static_cast<size_t>(kmin)] += below;
  out.grid.lower_trunc_mass = 0.0;  // clamped, not dropped
  out.grid.upper_trunc_mass = std::max(0.0, 1.0 - (total + below));
  out.support_lo = kmin;
  out.support_hi = kmax;
  return out;
}

std::string ProfileMethodName(ProfileMethod method) {
  switch (method) {
    case ProfileMethod::kAnalyticGaussian: return "analytic-gaussian";
    case ProfileMethod::kTemplateF: return "template-f";
    case ProfileMethod::kFftCertified: return "fft-certified";
    case ProfileMethod::kMonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

double GaussianProfileDelta(double sigma_gm, double sensitivity, double eps) {
  if (!(sigma_gm > 0.0)) {
    throw std::invalid_argument("GaussianProfileDelta: sigma must be > 0");
  }
  if (!(sensitivity > 0.0)) {
    throw std::invalid_argument("GaussianProfileDelta: sensitivity must be > 0");
  }
  if (!(eps >= 0.0)) {
    throw std::invalid_argument("GaussianProfileDelta: eps must be >= 0");
  }
  const double a = sensitivity / (2.0 * sigma_gm);
  const double b = eps * sigma_gm / sensitivity;
  const double delta = StdNormalCdf(a - b) - std::exp(eps) * StdNormalCdf(-a - b);
  return std::clamp(delta, 0.0, 1.0);
}

double GaussianAsymptoticRatio(double sigma, int64_t n, double eps) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double delta = GaussianProfileDelta(sigma / sn, 1.0 / static_cast<double>(n), eps);
  const double f = TemplateDelta(n, eps, sigma);
  if (delta < 1e-300 || f < 1e-300) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return delta / f;
}

ProfilePoint FftDeltaBmg(int64_t n, double gamma, double sigma0, double eps,
                         const AccountantGrid& grid) {
  if (n < 1) throw std::invalid_argument("FftDeltaBmg: n must be >= 1");
  grid.Validate();

  ProfilePoint pp;
  pp.eps = eps;
  pp.n = n;
  pp.method = ProfileMethod::kFftCertified;

  const DiscretizedLoss loss = BmgLossDistribution(gamma, sigma0, eps, grid);
  const double h = grid.spacing;
  const int64_t npts = grid.points;
  const int64_t k0 =
      static_cast<int64_t>(std::llround(-grid.origin / grid.spacing));

  const double snapped_top =
      grid.origin + static_cast<double>(loss.support_hi) * h;
  if (snapped_top <= 0.0 && loss.grid.upper_trunc_mass == 0.0) {
    // All per-user contributions are non-positive; the compound sum never
    // crosses 0.
    pp.delta = 0.0;
    pp.error_budget = 0.0;
    return pp;
  }

  // Per-user contribution: (1-gamma) at 0 plus gamma * discretized loss.
  std::vector<std::complex<double>> buf(static_cast<size_t>(npts));
  for (int64_t k = loss.support_lo; k <= loss.support_hi; ++k) {
    buf[static_cast<size_t>(k)] = gamma * loss.pmf[static_cast<size_t>(k)];
  }
  buf[static_cast<size_t>(k0)] += 1.0 - gamma;

  FftForward(buf);
  const double dn = static_cast<double>(n);
  for (auto& z : buf) {
    const double r = std::abs(z);
    if (r == 0.0) continue;
    const double mag = std::pow(r, dn);
    const double ang = std::arg(z) * dn;
    z = std::polar(mag, ang);
  }
  FftInverse(buf);

  // Index m holds the sum-lattice position (sum of per-user indices) mod
  // npts; per-user index k means value (k - k0) h, so a sum R (relative to
  // k0 per user) sits at m = (R + n k0) mod npts.  Unwrap R into the window
  // [-k0, npts - k0).
  const int64_t shift = (n % npts) * (k0 % npts) % npts;
  double pos_sum = 0.0;
  double neg_mass = 0.0;
  double pos_abs_sum = 0.0;
  for (int64_t m = 0; m < npts; ++m) {
    int64_t r = m - shift;
    r %= npts;
    if (r < 0) r += npts;
    if (r >= npts - k0) r -= npts;
    const double value = static_cast<double>(r) * h;
    if (value <= 0.0) {
      if (buf[static_cast<size_t>(m)].real() < 0.0) {
        neg_mass -= buf[static_cast<size_t>(m)].real();
      }
      continue;
    }
    pos_abs_sum += value;
    const double mass = buf[static_cast<size_t>(m)].real();
    if (mass > 0.0) {
      pos_sum += mass * value;
    } else {
      neg_mass -= mass;
    }
  }

  const double scale = 1.0 / (dn * gamma);
  double core = pos_sum * scale;

  // Floating-point noise model for the transform pipeline; negatives beyond a
  // generous multiple of it indicate a grid that is genuinely too coarse.
  const double eps_mach = std::numeric_limits<double>::epsilon();
  const double log2n = std::log2(std::max<double>(2.0, dn));
  const double fft_unit = eps_mach * (std::log2(static_cast<double>(npts)) + log2n);
  const double roundoff_budget = 4.0 * fft_unit * pos_abs_sum * scale;
  const double neg_allowed =
      std::max(1e-12, 64.0 * fft_unit * static_cast<double>(npts));
  if (neg_mass > neg_allowed) {
    throw NumericalError(
        "FftDeltaBmg: negative spectral artifacts exceed tolerance; refine "
        "the grid (points or range)");
  }

  if (core < roundoff_budget) {
    // Below the numeric floor of this grid.
    core = 0.0;
    pp.below_floor = true;
  }

  // Truncated upper-tail mass, pessimistically assigned the grid's maximum
  // positive value (per-draw mass, at most n*gamma expected occurrences).
  const double top_pos = std::max(grid.Top(), 0.0);
  const double trunc_term =
      loss.grid.upper_trunc_mass * dn * gamma * top_pos * scale;

  pp.delta = std::min(1.0, core + trunc_term);
  // Window escape (wrap-around) bound from the grid construction plus
  // roundoff plus the full discretization slack (round-up moves the sum up by
  // at most n*gamma*h).
  const double escape_budget =
      2.0 * std::exp(-kWindowLogMass) * dn * std::max(top_pos, 1.0) * scale;
  pp.error_budget = roundoff_budget + escape_budget + h + trunc_term;
  return pp;
}

ProfilePoint FftDeltaBmg(int64_t n, double gamma, double sigma0, double eps,
                         int64_t points_override) {
  if (gamma == 1.0) {
    ProfilePoint pp;
    pp.eps = eps;
    pp.n = n;
    pp.method = ProfileMethod::kFftCertified;
    if (eps > 0.0) {
      pp.delta = 0.0;
      pp.error_budget = 0.0;
      return pp;
    }
  }
  return FftDeltaBmg(n, gamma, sigma0, eps,
                     BuildDefaultGrid(n, gamma, sigma0, eps, points_override));
}

McEstimate McDeltaBmg(int64_t n, double gamma, double sigma0, double eps,
                      int64_t trials, uint64_t seed, int threads) {
  if (n < 1) throw std::invalid_argument("McDeltaBmg: n must be >= 1");
  if (trials < 10000) {
    throw std::invalid_argument("McDeltaBmg: trials must be >= 1e4");
  }
  const LossParams lp = MakeLossParams(gamma, sigma0, eps);
  const double a = 1.0 - gamma;

  constexpr int kShards = 64;
  struct Shard {
    KahanSum s1, s2;
    int64_t count = 0;
  };
  std::vector<Shard> shards(kShards);

  ParallelShards(kShards, threads, [&](int shard) {
    Rng rng(seed, static_cast<uint64_t>(shard));
    const int64_t lo = trials * shard / kShards;
    const int64_t hi = trials * (shard + 1) / kShards;
    Shard& acc = shards[shard];
    for (int64_t i = lo; i < hi; ++i) {
      // M0 ~ Bin(n, gamma) as a sum of Bernoulli draws (exact, documented).
      int64_t m0 = 0;
      for (int64_t j = 0; j < n; ++j) m0 += rng.NextBernoulli(gamma) ? 1 : 0;
      double sum = 0.0;
      for (int64_t j = 0; j < m0; ++j) {
        const double l = std::exp(lp.mu + lp.s * rng.NextGaussian());
        sum += gamma + a * l - lp.e_eps;
      }
      const double pos = sum > 0.0 ? sum : 0.0;
      acc.s1.Add(pos);
      acc.s2.Add(pos * pos);
      ++acc.count;
    }
  });

  double s1 = 0.0, s2 = 0.0;
  int64_t count = 0;
  for (const Shard& sh : shards) {
    s1 += sh.s1.Value();
    s2 += sh.s2.Value();
    count += sh.count;
  }
  const double nf = static_cast<double>(count);
  const double mean = s1 / nf;
  const double var = std::max(0.0, s2 / nf - mean * mean) * nf / (nf - 1.0);
  const double scale = 1.0 / (static_cast<double>(n) * gamma);
  McEstimate out;
  out.estimate = mean * scale;
  out.half_width = kZ975 * std::sqrt(var / nf) * scale;
  out.samples = count;
  return out;
}

double CalibrateEpsBmg(int64_t n, double gamma, double sigma0,
                       double delta_target, int64_t points_override) {
  if (!(delta_target > 0.0 && delta_target < 1.0)) {
    throw std::invalid_argument("CalibrateEpsBmg: delta_target must be in (0,1)");
  }
  if (gamma == 1.0) return 0.0;  // input-independent: any eps >= 0 works

  auto delta_at = [&](double eps) {
    return FftDeltaBmg(n, gamma, sigma0, eps, points_override).delta;
  };

  // Bracket: start from the template inversion when available, then verify
  // and widen.
  double hi = 1.0;
  try {
    const double chi = ChiLoBmg(gamma, sigma0);
    const double log_delta = std::log(delta_target);
    double e_lo = 1e-8, e_hi = 64.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (e_lo + e_hi);
      if (LogTemplateDelta(n, mid, chi) > log_delta) {
        e_lo = mid;
      } else {
        e_hi = mid;
      }
    }
    hi = 2.0 * e_hi;
  } catch (const std::exception&) {
    hi = 1.0;
  }
  constexpr double kEpsMax = 64.0;
  while (delta_at(hi) > delta_target) {
    hi *= 2.0;
    if (hi > kEpsMax) {
      throw NumericalError(
          "CalibrateEpsBmg: delta target unattainable at eps <= 64");
    }
  }
  double lo = hi / 2.0;
  while (lo > 1e-9 && delta_at(lo) <= delta_target) {
    hi = lo;
    lo *= 0.5;
  }
  if (delta_at(lo) <= delta_target) return lo;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (delta_at(mid) <= delta_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double CalibrateSigmaGm(int64_t n, double eps, double delta_target) {
  if (!(eps > 0.0)) throw std::invalid_argument("CalibrateSigmaGm: eps must be > 0");
  if (!(delta_target > 0.0 && delta_target < 1.0)) {
    throw std::invalid_argument("CalibrateSigmaGm: delta_target must be in (0,1)");
  }
  const double sn = std::sqrt(static_cast<double>(n));
  const double sens = 1.0 / static_cast<double>(n);
  auto delta_at = [&](double sigma) {
    return GaussianProfileDelta(sigma / sn, sens, eps);
  };
  double hi = 1.0;
  while (delta_at(hi) > delta_target) hi *= 2.0;
  double lo = hi / 2.0;
  while (lo > 1e-300 && delta_at(lo) <= delta_target) {
    hi = lo;
    lo *= 0.5;
  }
  while (hi - lo > 1e-8 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (delta_at(mid) <= delta_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace shuffledp
