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

#include "shuffledp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shuffledp/errors.hpp"

namespace shuffledp {

namespace {

constexpr double kGolden = 0.6180339887498949;

}  // namespace

RiskBreakdown MakeRiskBreakdown(double err1, int d, int64_t n) {
  if (d < 1 || n < 1) {
    throw std::invalid_argument("MakeRiskBreakdown: d and n must be >= 1");
  }
  RiskBreakdown rb;
  rb.err1 = err1;
  rb.d = d;
  rb.n = n;
  rb.err_n = err1 / static_cast<double>(n);
  rb.rmse = std::sqrt(rb.err_n / static_cast<double>(d));
  return rb;
}

double Err1Bmg(int d, double gamma, double sigma0) {
  if (d < 1) throw std::invalid_argument("Err1Bmg: d must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("Err1Bmg: gamma must be in [0,1)");
  }
  if (!(sigma0 > 0.0)) throw std::invalid_argument("Err1Bmg: sigma0 must be > 0");
  const double a = 1.0 - gamma;
  return static_cast<double>(d) * sigma0 * sigma0 / (a * a) + gamma / a;
}

double Sigma0FromChi(double gamma, double chi) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("Sigma0FromChi: gamma must be in (0,1)");
  }
  if (!(chi > 0.0)) throw std::invalid_argument("Sigma0FromChi: chi must be > 0");
  const double a = 1.0 - gamma;
  const double t = std::log1p(gamma / (a * a * chi * chi));
  return 1.0 / std::sqrt(t);
}

double Err1BmgGivenChi(int d, double gamma, double chi) {
  if (d < 1) throw std::invalid_argument("Err1BmgGivenChi: d must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("Err1BmgGivenChi: gamma must be in (0,1)");
  }
  if (!(chi > 0.0)) {
    throw std::invalid_argument("Err1BmgGivenChi: chi must be > 0");
  }
  const double a = 1.0 - gamma;
  const double t = std::log1p(gamma / (a * a * chi * chi));
  return static_cast<double>(d) / (a * a * t) + gamma / a;
}

GammaOpt OptimizeGamma(int d, double chi, double tol) {
  if (!(chi > 0.0)) throw std::invalid_argument("OptimizeGamma: chi must be > 0");
  if (!(tol > 0.0)) tol = 1e-10;
  auto objective = [&](double gamma) { return Err1BmgGivenChi(d, gamma, chi); };

  // Deterministic coarse scan over gamma (log-spaced in A = 1-gamma around
  // the asymptotic seed A = chi^{-2/3}), then golden-section refinement.
  const double a_seed =
      std::clamp(std::pow(chi, -2.0 / 3.0), 1e-12, 0.9);
  constexpr int kScan = 400;
  double best_a = a_seed;
  double best_f = objective(1.0 - a_seed);
  for (int i = 0; i < kScan; ++i) {
    // A spans [1e-9, 1 - 1e-9] geometrically, denser near 0.
    const double frac = static_cast<double>(i) / (kScan - 1);
    const double a = std::exp(std::log(1e-9) * (1.0 - frac));  // 1e-9 .. 1
    const double ac = std::min(a, 1.0 - 1e-12);
    const double f = objective(1.0 - ac);
    if (f < best_f) {
      best_f = f;
      best_a = ac;
    }
  }
  // Bracket around the best scan point (A-space, geometric neighbors).
  double lo = std::max(best_a / 4.0, 1e-12);
  double hi = std::min(best_a * 4.0, 1.0 - 1e-12);
  if (!(objective(1.0 - lo) > best_f && objective(1.0 - hi) > best_f)) {
    // Widen until the bracket turns upward on both sides (the objective
    // diverges at both ends, so this terminates).
    int guard = 0;
    while (objective(1.0 - lo) <= best_f && lo > 1e-12) {
      best_a = lo;
      best_f = objective(1.0 - lo);
      lo = std::max(lo / 4.0, 1e-12);
      if (++guard > 200) throw NumericalError("OptimizeGamma: bracket failure");
    }
    guard = 0;
    while (objective(1.0 - hi) <= best_f && hi < 1.0 - 1e-12) {
      best_a = hi;
      best_f = objective(1.0 - hi);
      hi = std::min(hi * 4.0, 1.0 - 1e-12);
      if (++guard > 200) throw NumericalError("OptimizeGamma: bracket failure");
    }
  }
  // Golden-section on A in [lo, hi].
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = objective(1.0 - x1);
  double f2 = objective(1.0 - x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = objective(1.0 - x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = objective(1.0 - x2);
    }
  }
  const double a_star = 0.5 * (lo + hi);
  GammaOpt out;
  out.gamma = 1.0 - a_star;
  out.err1 = objective(out.gamma);
  return out;
}

ChuaRiskCheck GaussianChiChuaRiskCheck(double sigma0) {
  if (!(sigma0 > 0.0)) {
    throw std::invalid_argument("GaussianChiChuaRiskCheck: sigma0 must be > 0");
  }
  ChuaRiskCheck out;
  out.err1 = sigma0 * sigma0;  // d = 1; the excess below is d-independent
  out.chi_chua = ChiChuaGaussian(sigma0);
  const double chi2 = out.chi_chua * out.chi_chua;
  out.excess = (sigma0 * sigma0 / chi2 - 1.0) * chi2;
  return out;
}

BmgPipelineResult PipelineBmgParamsFromPrivacy(int64_t n, double eps,
                                               double delta, int d,
                                               int64_t grid_points_override) {
  BmgPipelineResult out;
  out.chi = InvertTemplateForChi(n, eps, delta);
  const GammaOpt opt = OptimizeGamma(d, out.chi);
  out.gamma = opt.gamma;
  out.err1 = opt.err1;
  out.sigma0 = Sigma0FromChi(out.gamma, out.chi);
  out.certified =
      FftDeltaBmg(n, out.gamma, out.sigma0, eps, grid_points_override);
  out.certified_exceeds_target = out.certified.delta > delta;
  return out;
}

}  // namespace shuffledp
