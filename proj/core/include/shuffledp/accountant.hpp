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

#ifndef SHUFFLEDP_ACCOUNTANT_H_
#define SHUFFLEDP_ACCOUNTANT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "shuffledp/shuffle_index.hpp"

namespace shuffledp {

enum class Pessimism { kRoundUp, kRoundToNearest };

// Uniform lattice for the discretized privacy-loss contribution.  Values are
// origin + k * spacing for k in [0, points); points is a power of two and 0
// always lies exactly on the lattice.  The truncated per-draw tail masses of
// the loss variable are carried alongside.
struct AccountantGrid {
  double spacing = 0.0;
  double origin = 0.0;
  int64_t points = 0;
  double lower_trunc_mass = 0.0;
  double upper_trunc_mass = 0.0;
  Pessimism pessimism = Pessimism::kRoundUp;

  double Top() const { return origin + spacing * static_cast<double>(points - 1); }
  void Validate() const;
};

// Builds the default grid for the n-fold compound sum of BMG privacy-loss
// contributions.  The window covers the concentration range of the truncated
// sum (a Bernstein-type bound at mass 1e-16 on each side, intersected with
// the hard support hull and always containing 0) plus a 10% guard band per
// side; the point count adapts so the round-up discretization cost stays a
// small fraction of the sum's standard deviation (clamped to [2^20, 2^23]).
AccountantGrid BuildDefaultGrid(int64_t n, double gamma, double sigma0,
                                double eps, int64_t points_override = 0);

// The law of l_eps(Y) = gamma + (1-gamma) L - e^eps, Y ~ blanket, where L is
// Lognormal(-1/(2 sigma0^2), 1/sigma0^2), discretized onto the grid.  Under
// round-up the mass in (x_{k-1}, x_k] goes to x_k; mass below the grid floor
// is clamped up to the floor (pessimistic); mass above the grid top is left
// out and reported in upper_trunc_mass.
struct DiscretizedLoss {
  AccountantGrid grid;
  std::vector<double> pmf;  // indexed by lattice point, sums to 1 - upper_trunc_mass
  int64_t support_lo = 0;   // first index with nonzero mass
  int64_t support_hi = 0;   // last index with nonzero mass
  double mean_exact = 0.0;  // gamma + (1-gamma) - e^eps, for diagnostics
};

DiscretizedLoss BmgLossDistribution(double gamma, double sigma0, double eps,
                                    const AccountantGrid& grid);

enum class ProfileMethod {
  kAnalyticGaussian,
  kTemplateF,
  kFftCertified,
  kMonteCarlo,
};

std::string ProfileMethodName(ProfileMethod method);

// One point of a privacy profile.  For kFftCertified, delta is pessimistically
// discretized (round-up) and includes the truncated upper-tail mass assigned
// the grid's maximum positive value; adding error_budget additionally covers
// convolution wrap-around, FFT roundoff, and the full discretization slack,
// giving a bound that can only overestimate the true Balle positive-part
// expectation.
struct ProfilePoint {
  double eps = 0.0;
  double delta = 0.0;
  int64_t n = 0;
  ProfileMethod method = ProfileMethod::kFftCertified;
  double error_budget = 0.0;
  bool below_floor = false;  // delta snapped to 0 (under the numeric floor)
};

// Analytic Gaussian privacy profile
// delta = Phi(D/(2s) - eps*s/D) - e^eps * Phi(-D/(2s) - eps*s/D),
// clamped to [0, 1].
double GaussianProfileDelta(double sigma_gm, double sensitivity, double eps);

// Ratio delta_GM(sigma)(eps) / f_{n,eps}(sigma) in the mean-estimation
// setting (sensitivity 1/n, noise std sigma/sqrt(n)).  Returns NaN when both
// sides underflow below 1e-300.
double GaussianAsymptoticRatio(double sigma, int64_t n, double eps);

// Certified delta for the shuffled BMG via the compound-binomial bound
// delta(eps) <= (1/(n gamma)) E[(sum_{i<=M0} l_eps(Y_i))_+], M0 ~ Bin(n,gamma):
// per-user contribution (1-gamma) delta_0 + gamma law(l_eps), n-fold
// convolution by FFT power.
ProfilePoint FftDeltaBmg(int64_t n, double gamma, double sigma0, double eps,
                         const AccountantGrid& grid);
ProfilePoint FftDeltaBmg(int64_t n, double gamma, double sigma0, double eps,
                         int64_t points_override = 0);

// Monte Carlo estimate of the same bound: sample M0 ~ Bin(n, gamma), sum M0
// lognormal loss draws, average the positive part, divide by n*gamma.
McEstimate McDeltaBmg(int64_t n, double gamma, double sigma0, double eps,
                      int64_t trials, uint64_t seed, int threads = 1);

// Smallest eps (bisection, relative tolerance 1e-6) whose certified FFT delta
// is <= delta_target.  gamma = 1 returns 0.
double CalibrateEpsBmg(int64_t n, double gamma, double sigma0,
                       double delta_target, int64_t points_override = 0);

// Smallest sigma with GaussianProfileDelta(sigma/sqrt(n), 1/n, eps) <=
// delta_target (bisection, relative tolerance 1e-8).
double CalibrateSigmaGm(int64_t n, double eps, double delta_target);

}  // namespace shuffledp

#endif  // SHUFFLEDP_ACCOUNTANT_H_
