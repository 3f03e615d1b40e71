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

#include "shuffledp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "shuffledp/errors.hpp"

namespace shuffledp {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

// Continued fraction for the incomplete beta (modified Lentz).
double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

double SimpsonRecurse(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb, double whole,
                      double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) throw NumericalError("adaptive Simpson recursion limit");
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return SimpsonRecurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         SimpsonRecurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// log of the normalization of the spherical marginal:
// int_{-1}^{1} (1-t^2)^{(d-3)/2} dt = sqrt(pi) Gamma((d-1)/2) / Gamma(d/2).
double LogMarginalNorm(int d) {
  return 0.5 * std::log(M_PI) + std::lgamma(0.5 * (d - 1)) -
         std::lgamma(0.5 * d);
}

}  // namespace

double StdNormalPdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double StdNormalCdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double StdNormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("StdNormalQuantile: p must be in (0,1)");
  }
  // Acklam's rational approximation, then two Halley refinements.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    const double e = StdNormalCdf(x) - p;
    const double u = e / StdNormalPdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double RegularizedIncompleteBeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("RegularizedIncompleteBeta: a, b must be > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("RegularizedIncompleteBeta: x must be in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                       double b, double abs_tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return SimpsonRecurse(f, a, b, fa, fm, fb, whole, abs_tol, 60);
}

double LognormalQuantile(double mu, double s, double p) {
  return std::exp(mu + s * StdNormalQuantile(p));
}

double CapUpperMass(double theta, int dim) {
  if (dim < 2) throw std::invalid_argument("CapUpperMass: dim must be >= 2");
  if (!(theta >= -1.0 && theta <= 1.0)) {
    throw std::invalid_argument("CapUpperMass: theta must be in [-1,1]");
  }
  if (theta <= -1.0) return 1.0;
  if (theta >= 1.0) return 0.0;
  if (theta == 0.0) return 0.5;  // symmetry, exact
  if (dim >= 4) {
    // (T+1)/2 ~ Beta((d-1)/2, (d-1)/2); upper tail evaluated directly on the
    // smaller argument to avoid cancellation.
    const double a = 0.5 * (dim - 1);
    return RegularizedIncompleteBeta(a, a, 0.5 * (1.0 - theta));
  }
  // d in {2,3}: the exponent (d-3)/2 is non-positive; t = sin(u) removes the
  // endpoint singularity:  (1-t^2)^{(d-3)/2} dt = cos(u)^{d-2} du.
  const double norm = std::exp(LogMarginalNorm(dim));
  const int power = dim - 2;
  auto integrand = [power](double u) {
    return power == 0 ? 1.0 : std::cos(u);
  };
  const double integral =
      AdaptiveSimpson(integrand, std::asin(theta), M_PI_2, 1e-10);
  return std::min(1.0, std::max(0.0, integral / norm));
}

CapMoments ComputeCapMoments(double theta, int dim) {
  if (dim < 2) throw std::invalid_argument("ComputeCapMoments: dim must be >= 2");
  if (!(theta >= -1.0 && theta <= 1.0)) {
    throw std::invalid_argument("ComputeCapMoments: theta must be in [-1,1]");
  }
  CapMoments cm;
  cm.dim = dim;
  cm.theta = theta;
  if (theta >= 1.0) {
    cm.q = 1.0;
    cm.alpha = 1.0;  // limit of E[T | T >= theta] as theta -> 1
    return cm;
  }
  const double upper = CapUpperMass(theta, dim);
  cm.q = 1.0 - upper;
  // E[T 1{T >= theta}] = c_d (1-theta^2)^{(d-1)/2} / (d-1), with c_d the
  // marginal normalization; computed in logs for large d.
  const double one_minus_t2 = std::max(0.0, (1.0 - theta) * (1.0 + theta));
  if (one_minus_t2 == 0.0 || upper == 0.0) {
    // theta = -1: whole sphere, zero mean.  upper underflow near theta = 1:
    // the conditional mean tends to 1.
    cm.alpha = theta >= 0.0 ? 1.0 : 0.0;
    return cm;
  }
  const double log_num = 0.5 * (dim - 1) * std::log(one_minus_t2) -
                         std::log(static_cast<double>(dim - 1)) -
                         LogMarginalNorm(dim);
  cm.alpha = std::exp(log_num) / upper;
  return cm;
}

double GaussianLimitConstant(double tau) {
  const double phi = StdNormalPdf(tau);
  const double cdf = StdNormalCdf(tau);
  return cdf * (1.0 - cdf) / (phi * phi);
}

MonotoneCubicInterpolator::MonotoneCubicInterpolator(std::vector<double> x,
                                                     std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("MonotoneCubicInterpolator: need >= 2 knots");
  }
  std::vector<double> d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    const double dx = x_[i + 1] - x_[i];
    if (!(dx > 0.0)) {
      throw std::invalid_argument("MonotoneCubicInterpolator: x not increasing");
    }
    d[i] = (y_[i + 1] - y_[i]) / dx;
  }
  slope_.resize(n);
  slope_[0] = d[0];
  slope_[n - 1] = d[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    slope_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
  }
  // Fritsch-Carlson limiter.
  for (size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      slope_[i] = slope_[i + 1] = 0.0;
      continue;
    }
    const double a = slope_[i] / d[i];
    const double b = slope_[i + 1] / d[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      slope_[i] = t * a * d[i];
      slope_[i + 1] = t * b * d[i];
    }
  }
}

double MonotoneCubicInterpolator::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const size_t i = static_cast<size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] +
         h11 * h * slope_[i + 1];
}

}  // namespace shuffledp
