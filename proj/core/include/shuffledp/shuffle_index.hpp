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

#ifndef SHUFFLEDP_SHUFFLE_INDEX_H_
#define SHUFFLEDP_SHUFFLE_INDEX_H_

#include <cstdint>
#include <optional>
#include <string>

#include "shuffledp/randomizer.hpp"

namespace shuffledp {

// A shuffle index value.  The infinite case (degenerate spec, e.g. PrivUnit
// with p + q = 1) is an explicit variant, never a floating-point infinity
// inside arithmetic.
struct IndexValue {
  bool is_infinite = false;
  double value = 0.0;

  static IndexValue Finite(double v) { return IndexValue{false, v}; }
  static IndexValue Infinite() { return IndexValue{true, 0.0}; }
};

// chi_lo for BMG: sqrt(gamma / ((1-gamma)^2 (e^{1/sigma0^2} - 1))).
// gamma in {0,1} is rejected (the expression degenerates).
double ChiLoBmg(double gamma, double sigma0);

// chi_lo for randomized response with p in [1/2, 1]:
// sqrt((1-t)/t^2), t = 2p-1.  p = 1 gives 0.
double ChiLoRr(double p);

// Inverts chi_lo -> t for RR: the positive root of chi^2 t^2 + t - 1 = 0.
double RrTFromChiLo(double chi);

// chi_lo for PrivUnit: sqrt(gamma q (1-q) / Delta^2) with q from the cap
// moments, Delta = p + q - 1, and blanket mass gamma = min(p/(1-q), (1-p)/q).
// Delta = 0 yields the infinite-index variant.
IndexValue ChiLoPrivUnit(double p, double theta, int dim);

// chi_chua for the Gaussian local randomizer: 1/sqrt(V) with
// V = e^{4/sigma0^2} - 2 e^{2/sigma0^2} + e^{1/sigma0^2}.
double ChiChuaGaussian(double sigma0);

// Inverts chi_chua -> sigma0 (V is strictly increasing in 1/sigma0^2).
double Sigma0FromChiChua(double chi);

// The asymptotic profile template
// f_{n,eps}(chi) = exp(-chi^2 eps^2 n / 2) / (sqrt(2 pi) chi^3 eps^2 n^{3/2}).
// May exceed 1 for tiny eps * chi * sqrt(n).
double TemplateDelta(int64_t n, double eps, double chi);
double LogTemplateDelta(int64_t n, double eps, double chi);

// Solves f_{n,eps}(chi) = delta for chi by bisection in log space to relative
// tolerance 1e-10 (f is strictly decreasing in chi).  Throws NumericalError
// with the attainable range if delta cannot be bracketed.
double InvertTemplateForChi(int64_t n, double eps, double delta);

// A Monte Carlo mean estimate with a 95% confidence half-width.
struct McEstimate {
  double estimate = 0.0;
  double half_width = 0.0;
  int64_t samples = 0;
};

// Reference distribution for the amplification variable: the blanket, or the
// output law at a fixed input point.
struct Reference {
  static Reference Blanket() { return Reference{}; }
  static Reference AtPoint(std::vector<double> x) {
    Reference r;
    r.point = std::move(x);
    return r;
  }
  bool is_blanket() const { return !point.has_value(); }

  std::optional<std::vector<double>> point;
};

// Sample-variance estimate of l_0(Y; x1, x1p, R_ref) for Y drawn from the
// reference, with an asymptotic-normality 95% half-width (from the fourth
// central moment).  The pair (x1, x1p) must be zero-out adjacent: at least
// one side must have the blanket law (bottom, or a zero vector under
// BMG/GaussianLocal).  Sharded deterministically; results do not depend on
// the thread count.
McEstimate McEll0Variance(const RandomizerSpec& spec, const Input& x1,
                          const Input& x1p, const Reference& reference,
                          int64_t samples, uint64_t seed, int threads = 1);

// Closed-form chi_lo for a spec plus optional Monte Carlo cross-check, as
// reported by the CLI `chi` subcommand.  chi_lo is absent for GaussianLocal
// (gamma = 0 leaves the defining 1/gamma scaling undefined); PrivUnit with
// Delta = 0 reports the explicit infinite-index variant.
struct ShuffleIndexReport {
  std::optional<IndexValue> chi_lo;
  std::optional<double> chi_chua;       // GaussianLocal only
  std::optional<McEstimate> mc_variance;  // Var[l_0] under the reference
  std::string reference = "blanket";
  std::string note;
};

ShuffleIndexReport MakeShuffleIndexReport(const RandomizerSpec& spec,
                                          int64_t mc_samples, uint64_t seed,
                                          int threads = 1);

}  // namespace shuffledp

#endif  // SHUFFLEDP_SHUFFLE_INDEX_H_
