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

#include "shuffledp/randomizer.hpp"

#include <cmath>
#include <stdexcept>

#include "shuffledp/errors.hpp"

namespace shuffledp {

namespace {

constexpr double kNormSlack = 1e-9;

double Norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// <x,y>/sigma0^2 - |x|^2/(2 sigma0^2), the exponent of the Gaussian density
// ratio phi(y-x)/phi(y).
double GaussianRatioExponent(const std::vector<double>& x, const Message& y,
                             double sigma0) {
  const double s2 = sigma0 * sigma0;
  double xx = 0.0;
  for (double v : x) xx += v * v;
  return Dot(x, y) / s2 - 0.5 * xx / s2;
}

}  // namespace

std::string FamilyName(Family family) {
  switch (family) {
    case Family::kBmg: return "bmg";
    case Family::kGaussianLocal: return "gaussian";
    case Family::kRandomizedResponse: return "rr";
    case Family::kPrivUnit: return "privunit";
  }
  return "unknown";
}

RandomizerSpec RandomizerSpec::Bmg(int dim, double gamma, double sigma0) {
  RandomizerSpec s;
  s.family = Family::kBmg;
  s.dim = dim;
  s.gamma = gamma;
  s.sigma0 = sigma0;
  s.Validate();
  return s;
}

RandomizerSpec RandomizerSpec::GaussianLocal(int dim, double sigma0) {
  RandomizerSpec s;
  s.family = Family::kGaussianLocal;
  s.dim = dim;
  s.gamma = 0.0;
  s.sigma0 = sigma0;
  s.Validate();
  return s;
}

RandomizerSpec RandomizerSpec::RandomizedResponse(double p) {
  RandomizerSpec s;
  s.family = Family::kRandomizedResponse;
  s.dim = 1;
  s.p = p;
  s.Validate();
  return s;
}

RandomizerSpec RandomizerSpec::PrivUnit(int dim, double p, double theta) {
  RandomizerSpec s;
  s.family = Family::kPrivUnit;
  s.dim = dim;
  s.p = p;
  s.theta = theta;
  s.Validate();
  return s;
}

void RandomizerSpec::Validate() const {
  switch (family) {
    case Family::kBmg:
      if (dim < 1) throw std::invalid_argument("bmg: dim must be >= 1");
      if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("bmg: gamma must be in (0,1]");
      }
      if (!(sigma0 > 0.0)) throw std::invalid_argument("bmg: sigma0 must be > 0");
      break;
    case Family::kGaussianLocal:
      if (dim < 1) throw std::invalid_argument("gaussian: dim must be >= 1");
      if (gamma != 0.0) throw std::invalid_argument("gaussian: gamma must be 0");
      if (!(sigma0 > 0.0)) {
        throw std::invalid_argument("gaussian: sigma0 must be > 0");
      }
      break;
    case Family::kRandomizedResponse:
      if (dim != 1) throw std::invalid_argument("rr: dim must be 1");
      if (!(p >= 0.5 && p <= 1.0)) {
        throw std::invalid_argument("rr: p must be in [1/2, 1]");
      }
      break;
    case Family::kPrivUnit:
      if (dim < 2) throw std::invalid_argument("privunit: dim must be >= 2");
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("privunit: p must be in [0,1]");
      }
      if (!(theta >= -1.0 && theta <= 1.0)) {
        throw std::invalid_argument("privunit: theta must be in [-1,1]");
      }
      break;
  }
}

std::vector<double> ValidateInput(const RandomizerSpec& spec,
                                  const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != spec.dim) {
    throw std::invalid_argument("input dimension does not match the spec");
  }
  switch (spec.family) {
    case Family::kBmg:
    case Family::kGaussianLocal: {
      const double norm = Norm2(x);
      if (norm <= 1.0) return x;
      if (norm > 1.0 + kNormSlack) {
        throw std::invalid_argument("input norm exceeds 1");
      }
      std::vector<double> y = x;
      for (double& v : y) v /= norm;
      return y;
    }
    case Family::kRandomizedResponse: {
      if (x[0] != 1.0 && x[0] != -1.0) {
        throw std::invalid_argument("rr input must be -1 or +1");
      }
      return x;
    }
    case Family::kPrivUnit: {
      const double norm = Norm2(x);
      if (std::fabs(norm - 1.0) > kNormSlack) {
        throw std::invalid_argument("privunit input must be a unit vector");
      }
      std::vector<double> y = x;
      for (double& v : y) v /= norm;
      return y;
    }
  }
  throw std::invalid_argument("unknown family");
}

// PrivUnit marginal inverse-CDF tables.  For each side of the cap, the
// marginal of T restricted to the side is inverted on a monotone cubic spline
// of the incomplete-beta CDF; knots are cosine-spaced so both endpoints are
// resolved.  Spline knots map uniform u in [0,1] to t.
struct Sampler::PrivUnitTables {
  std::unique_ptr<MonotoneCubicInterpolator> cap;         // u -> t in [theta, 1]
  std::unique_ptr<MonotoneCubicInterpolator> complement;  // u -> t in [-1, theta]
  double q = 0.0;  // Pr(T < theta)
};

namespace {

std::unique_ptr<MonotoneCubicInterpolator> BuildInverseCdf(double t_lo,
                                                           double t_hi, int dim,
                                                           double mass_lo,
                                                           double mass_hi) {
  // CDF within [t_lo, t_hi]: F(t) = (U(t_lo) - U(t)) / (U(t_lo) - U(t_hi)),
  // where U is the upper-tail mass.  mass_lo = U(t_lo), mass_hi = U(t_hi).
  constexpr int kKnots = 2049;
  std::vector<double> us, ts;
  us.reserve(kKnots);
  ts.reserve(kKnots);
  const double denom = mass_lo - mass_hi;
  double prev_u = -1.0;
  for (int i = 0; i < kKnots; ++i) {
    const double frac = 0.5 * (1.0 - std::cos(M_PI * i / (kKnots - 1)));
    const double t = t_lo + (t_hi - t_lo) * frac;
    double u;
    if (i == 0) {
      u = 0.0;
    } else if (i == kKnots - 1) {
      u = 1.0;
    } else {
      u = (mass_lo - CapUpperMass(t, dim)) / denom;
    }
    if (u <= prev_u) continue;  // drop flat knots so x stays strictly increasing
    prev_u = u;
    us.push_back(u);
    ts.push_back(t);
  }
  return std::make_unique<MonotoneCubicInterpolator>(std::move(us),
                                                     std::move(ts));
}

}  // namespace

Sampler::Sampler(const RandomizerSpec& spec) : spec_(spec) {
  spec_.Validate();
  if (spec_.family == Family::kPrivUnit) {
    privunit_ = std::make_unique<PrivUnitTables>();
    const double upper = CapUpperMass(spec_.theta, spec_.dim);
    privunit_->q = 1.0 - upper;
    if (upper > 0.0) {
      privunit_->cap =
          BuildInverseCdf(spec_.theta, 1.0, spec_.dim, upper, 0.0);
    }
    if (upper < 1.0) {
      privunit_->complement =
          BuildInverseCdf(-1.0, spec_.theta, spec_.dim, 1.0, upper);
    }
  }
}

Sampler::~Sampler() = default;
Sampler::Sampler(Sampler&&) noexcept = default;
Sampler& Sampler::operator=(Sampler&&) noexcept = default;

Message Sampler::Sample(const Input& input, Rng& rng) const {
  switch (spec_.family) {
    case Family::kBmg:
    case Family::kGaussianLocal: {
      Message y(spec_.dim);
      bool blanket = true;
      std::vector<double> x;
      if (!input.is_bottom()) {
        x = ValidateInput(spec_, *input.value);
        if (spec_.family == Family::kGaussianLocal) {
          blanket = false;
        } else {
          blanket = rng.NextBernoulli(spec_.gamma);
        }
      }
      for (int i = 0; i < spec_.dim; ++i) {
        y[i] = spec_.sigma0 * rng.NextGaussian() + (blanket ? 0.0 : x[i]);
      }
      return y;
    }
    case Family::kRandomizedResponse: {
      double x;
      if (input.is_bottom()) {
        // Blanket: uniform on {-1,+1}.
        x = rng.NextBernoulli(0.5) ? 1.0 : -1.0;
        return {x};
      }
      x = ValidateInput(spec_, *input.value)[0];
      return {rng.NextBernoulli(spec_.p) ? x : -x};
    }
    case Family::kPrivUnit: {
      std::vector<double> v;
      bool cap_side;
      if (input.is_bottom()) {
        // Blanket: uniform on the sphere.  Direction is irrelevant; draw a
        // uniform axis by taking v = e_1 and the unconditioned marginal.
        v.assign(spec_.dim, 0.0);
        v[0] = 1.0;
        const double u = rng.NextUnit();
        cap_side = u >= privunit_->q;  // Pr(T >= theta) = 1 - q
      } else {
        v = ValidateInput(spec_, *input.value);
        cap_side = rng.NextBernoulli(spec_.p);
      }
      const MonotoneCubicInterpolator* inv =
          cap_side ? privunit_->cap.get() : privunit_->complement.get();
      if (inv == nullptr) {
        throw NumericalError("privunit: selected cap side has zero mass");
      }
      const double t = std::min(1.0, std::max(-1.0, (*inv)(rng.NextUnit())));
      // Uniform direction in the hyperplane orthogonal to v.
      std::vector<double> w(spec_.dim);
      double norm = 0.0;
      do {
        for (auto& c : w) c = rng.NextGaussian();
        const double proj = Dot(w, v);
        for (int i = 0; i < spec_.dim; ++i) w[i] -= proj * v[i];
        norm = Norm2(w);
      } while (norm < 1e-12);
      const double r = std::sqrt(std::max(0.0, 1.0 - t * t));
      Message y(spec_.dim);
      for (int i = 0; i < spec_.dim; ++i) y[i] = t * v[i] + r * w[i] / norm;
      return y;
    }
  }
  throw std::invalid_argument("unknown family");
}

double EstimatorScale(const RandomizerSpec& spec) {
  spec.Validate();
  switch (spec.family) {
    case Family::kBmg: {
      const double a = 1.0 - spec.gamma;
      if (a == 0.0) {
        throw std::invalid_argument("bmg estimator undefined at gamma = 1");
      }
      return 1.0 / a;
    }
    case Family::kGaussianLocal:
      return 1.0;
    case Family::kRandomizedResponse: {
      const double t = 2.0 * spec.p - 1.0;
      if (t == 0.0) {
        throw std::invalid_argument("rr estimator undefined at p = 1/2");
      }
      return 1.0 / t;
    }
    case Family::kPrivUnit: {
      const CapMoments cm = ComputeCapMoments(spec.theta, spec.dim);
      const double delta = spec.p + cm.q - 1.0;
      const double m = cm.alpha * delta / cm.q;
      if (m == 0.0 || !std::isfinite(m)) {
        throw std::invalid_argument("privunit estimator undefined (m = 0)");
      }
      return 1.0 / m;
    }
  }
  throw std::invalid_argument("unknown family");
}

std::vector<double> Estimate(const RandomizerSpec& spec, const Message& msg) {
  if (static_cast<int>(msg.size()) != spec.dim) {
    throw std::invalid_argument("message dimension does not match the spec");
  }
  const double scale = EstimatorScale(spec);
  std::vector<double> out = msg;
  for (double& v : out) v *= scale;
  return out;
}

double LogLikelihoodRatioToBlanket(const RandomizerSpec& spec,
                                   const std::vector<double>& input,
                                   const Message& msg) {
  spec.Validate();
  if (spec.family != Family::kBmg && spec.family != Family::kGaussianLocal) {
    throw std::invalid_argument(
        "log likelihood ratio supported for bmg/gaussian only");
  }
  const std::vector<double> x = ValidateInput(spec, input);
  const double w = GaussianRatioExponent(x, msg, spec.sigma0);
  if (spec.family == Family::kGaussianLocal) return w;
  const double gamma = spec.gamma;
  const double a = 1.0 - gamma;
  // log(gamma + (1-gamma) e^w), stable for large |w|.
  if (gamma == 1.0) return 0.0;
  if (w > 0.0) return w + std::log(a + gamma * std::exp(-w));
  return std::log(gamma + a * std::exp(w));
}

double DensityRatioToBlanket(const RandomizerSpec& spec, const Input& input,
                             const Message& msg) {
  if (input.is_bottom()) return 1.0;
  switch (spec.family) {
    case Family::kBmg:
    case Family::kGaussianLocal:
      return std::exp(LogLikelihoodRatioToBlanket(spec, *input.value, msg));
    case Family::kRandomizedResponse: {
      const double x = ValidateInput(spec, *input.value)[0];
      // Blanket is uniform on {-1,+1}: ratio = 2 P_x(y).
      return 2.0 * (msg[0] == x ? spec.p : 1.0 - spec.p);
    }
    case Family::kPrivUnit: {
      const std::vector<double> v = ValidateInput(spec, *input.value);
      const CapMoments cm = ComputeCapMoments(spec.theta, spec.dim);
      const double h = spec.p / (1.0 - cm.q);
      const double l = (1.0 - spec.p) / cm.q;
      double dot = 0.0;
      for (size_t i = 0; i < v.size(); ++i) dot += v[i] * msg[i];
      return dot >= spec.theta ? h : l;
    }
  }
  throw std::invalid_argument("unknown family");
}

bool IsBlanketLaw(const RandomizerSpec& spec, const Input& input) {
  if (input.is_bottom()) return true;
  if (spec.family == Family::kBmg || spec.family == Family::kGaussianLocal) {
    for (double v : *input.value) {
      if (v != 0.0) return false;
    }
    return true;
  }
  return false;
}

}  // namespace shuffledp
