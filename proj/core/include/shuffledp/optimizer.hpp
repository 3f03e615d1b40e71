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

#ifndef SHUFFLEDP_OPTIMIZER_H_
#define SHUFFLEDP_OPTIMIZER_H_

#include <cstdint>

#include "shuffledp/accountant.hpp"

namespace shuffledp {

// Single-user worst-case MSE and its n-user / per-coordinate forms.
struct RiskBreakdown {
  double err1 = 0.0;
  double err_n = 0.0;  // err1 / n for additive estimators
  double rmse = 0.0;   // sqrt(err_n / d)
  int d = 1;
  int64_t n = 1;
};

RiskBreakdown MakeRiskBreakdown(double err1, int d, int64_t n);

// Exact single-user worst-case MSE of BMG with the Y/(1-gamma) estimator:
// d sigma0^2 / (1-gamma)^2 + gamma / (1-gamma).  gamma = 1 rejected.
double Err1Bmg(int d, double gamma, double sigma0);

// sigma0 pinned by the chi_lo budget at equality:
// sigma0^2 = 1 / log(1 + gamma / ((1-gamma)^2 chi^2)).
double Sigma0FromChi(double gamma, double chi);

// The risk objective with sigma0 substituted:
// d / ((1-gamma)^2 log(1 + gamma/((1-gamma)^2 chi^2))) + gamma/(1-gamma).
double Err1BmgGivenChi(int d, double gamma, double chi);

struct GammaOpt {
  double gamma = 0.0;
  double err1 = 0.0;
};

// Minimizes Err1BmgGivenChi over gamma in (0,1): coarse deterministic scan
// seeded at the asymptotic rule gamma = 1 - chi^{-2/3}, then golden-section
// refinement to tolerance tol on gamma.
GammaOpt OptimizeGamma(int d, double chi, double tol = 1e-10);

// Diagnostics for the gamma = 0 Gaussian randomizer: err1 = d sigma0^2 and
// the normalized excess (err1/(d chi_chua^2) - 1) * chi_chua^2, which tends
// to 9/2.  The excess is d-independent.
struct ChuaRiskCheck {
  double err1 = 0.0;       // at d = 1
  double chi_chua = 0.0;
  double excess = 0.0;     // (sigma0^2 / chi_chua^2 - 1) * chi_chua^2
};

ChuaRiskCheck GaussianChiChuaRiskCheck(double sigma0);

// End-to-end BMG design for a privacy target: chi from the template
// inversion, gamma from the risk optimization, sigma0 from the exact
// relation, then an FFT re-certification of delta at the chosen parameters.
// The certified point is reported alongside and may exceed the target (the
// template is asymptotic); it is flagged, never reconciled silently.
struct BmgPipelineResult {
  double chi = 0.0;
  double gamma = 0.0;
  double sigma0 = 0.0;
  double err1 = 0.0;
  ProfilePoint certified;
  bool certified_exceeds_target = false;
};

BmgPipelineResult PipelineBmgParamsFromPrivacy(int64_t n, double eps,
                                               double delta, int d,
                                               int64_t grid_points_override = 0);

}  // namespace shuffledp

#endif  // SHUFFLEDP_OPTIMIZER_H_
