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

#ifndef SHUFFLEDP_NUMERICS_H_
#define SHUFFLEDP_NUMERICS_H_

#include <functional>
#include <vector>

namespace shuffledp {

// Standard normal density.
double StdNormalPdf(double x);

// Standard normal CDF via erfc; accurate in both tails (absolute error well
// below 1e-12, relative error preserved for large negative x).
double StdNormalCdf(double x);

// Inverse standard normal CDF for p in (0,1).  Rational initial guess
// refined by Halley steps; relative error around 1e-15.
double StdNormalQuantile(double p);

// Regularized incomplete beta function I_x(a,b), a,b > 0, x in [0,1].
// Continued-fraction evaluation (modified Lentz).
double RegularizedIncompleteBeta(double a, double b, double x);

// Adaptive Simpson quadrature of f on [a,b] to absolute tolerance abs_tol.
double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                       double b, double abs_tol);

// Quantile of Lognormal(mu, s^2): exp(mu + s * z_p).
double LognormalQuantile(double mu, double s, double p);

// Spherical-cap moments for T = <U, v> with U uniform on S^{d-1}.
// q = Pr(T < theta); alpha = E[T | T >= theta].  The marginal density of T is
// proportional to (1 - t^2)^{(d-3)/2} on [-1, 1].
struct CapMoments {
  double q = 0.0;
  double alpha = 0.0;
  int dim = 0;
  double theta = 0.0;
};

// Upper-tail mass Pr(T >= theta).  Uses the regularized incomplete beta for
// d >= 4 and adaptive Simpson with the t = sin(u) substitution for d in
// {2, 3}, where the exponent (d-3)/2 is non-positive.
double CapUpperMass(double theta, int dim);

CapMoments ComputeCapMoments(double theta, int dim);

// C(tau) = Phi(tau) * (1 - Phi(tau)) / phi(tau)^2.  Even in tau, minimized at
// tau = 0 with C(0) = pi/2.
double GaussianLimitConstant(double tau);

// Monotone cubic (Fritsch-Carlson) interpolant on strictly increasing knots.
// Stays within the data range and preserves monotonicity, which makes it
// usable as an inverse-CDF table.
class MonotoneCubicInterpolator {
 public:
  MonotoneCubicInterpolator(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

}  // namespace shuffledp

#endif  // SHUFFLEDP_NUMERICS_H_
