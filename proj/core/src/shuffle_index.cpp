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

#include "shuffledp/shuffle_index.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "shuffledp/errors.hpp"
#include "shuffledp/parallel.hpp"

namespace shuffledp {

namespace {

constexpr double kZ975 = 1.959963984540054;  // Phi^{-1}(0.975)

}  // namespace

double ChiLoBmg(double gamma, double sigma0) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("ChiLoBmg: gamma must be in (0,1)");
  }
  if (!(sigma0 > 0.0)) throw std::invalid_argument("ChiLoBmg: sigma0 must be > 0");
  const double a = 1.0 - gamma;
  return std::sqrt(gamma / (a * a * std::expm1(1.0 / (sigma0 * sigma0))));
}

double ChiLoRr(double p) {
  if (!(p >= 0.5 && p <= 1.0)) {
    throw std::invalid_argument("ChiLoRr: p must be in [1/2, 1]");
  }
  const double t = 2.0 * p - 1.0;
  if (t == 1.0) return 0.0;
  if (t == 0.0) {
    throw std::invalid_argument("ChiLoRr: p = 1/2 is degenerate (t = 0)");
  }
  return std::sqrt((1.0 - t) / (t * t));
}

double RrTFromChiLo(double chi) {
  if (!(chi > 0.0)) throw std::invalid_argument("RrTFromChiLo: chi must be > 0");
  const double c2 = chi * chi;
  return (-1.0 + std::sqrt(1.0 + 4.0 * c2)) / (2.0 * c2);
}

IndexValue ChiLoPrivUnit(double p, double theta, int dim) {
  const CapMoments cm = ComputeCapMoments(theta, dim);
  const double q = cm.q;
  if (!(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("ChiLoPrivUnit: degenerate cap (q in {0,1})");
  }
  const double delta = p + q - 1.0;
  // Delta below the cap-moment accuracy means the two density levels are
  // numerically indistinguishable from uniform.
  if (std::fabs(delta) < 1e-12) return IndexValue::Infinite();
  const double h = p / (1.0 - q);
  const double l = (1.0 - p) / q;
  const double gamma = std::min(h, l);
  return IndexValue::Finite(std::sqrt(gamma * q * (1.0 - q) / (delta * delta)));
}

double ChiChuaGaussian(double sigma0) {
  if (!(sigma0 > 0.0)) {
    throw std::invalid_argument("ChiChuaGaussian: sigma0 must be > 0");
  }
  const double a = 1.0 / (sigma0 * sigma0);
  // e^{4a} - 2e^{2a} + e^{a}; the constant terms cancel, so expm1 keeps full
  // precision for large sigma0.
  const double v = std::expm1(4.0 * a) - 2.0 * std::expm1(2.0 * a) +
                   std::expm1(a);
  return 1.0 / std::sqrt(v);
}

double Sigma0FromChiChua(double chi) {
  if (!(chi > 0.0)) {
    throw std::invalid_argument("Sigma0FromChiChua: chi must be > 0");
  }
  const double target = 1.0 / (chi * chi);  // V(a) = target, V increasing in a
  auto v_of_a = [](double a) {
    return std::expm1(4.0 * a) - 2.0 * std::expm1(2.0 * a) + std::expm1(a);
  };
  double lo = 0.0, hi = 1.0;
  while (v_of_a(hi) < target) {
    hi *= 2.0;
    if (hi > 1e8) throw NumericalError("Sigma0FromChiChua: bracket failure");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (v_of_a(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 1.0 / std::sqrt(0.5 * (lo + hi));
}

double LogTemplateDelta(int64_t n, double eps, double chi) {
  if (n < 1) throw std::invalid_argument("TemplateDelta: n must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("TemplateDelta: eps must be > 0");
  if (!(chi > 0.0)) throw std::invalid_argument("TemplateDelta: chi must be > 0");
  const double dn = static_cast<double>(n);
  return -0.5 * chi * chi * eps * eps * dn - 0.5 * std::log(2.0 * M_PI) -
         3.0 * std::log(chi) - 2.0 * std::log(eps) - 1.5 * std::log(dn);
}

double TemplateDelta(int64_t n, double eps, double chi) {
  return std::exp(LogTemplateDelta(n, eps, chi));
}

double InvertTemplateForChi(int64_t n, double eps, double delta) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("InvertTemplateForChi: delta must be > 0");
  }
  const double log_delta = std::log(delta);
  constexpr double kChiMin = 1e-12;
  if (LogTemplateDelta(n, eps, kChiMin) < log_delta) {
    throw NumericalError(
        "InvertTemplateForChi: delta above the attainable range (f(chi_min) < "
        "delta); attainable deltas are below f(n, eps, 1e-12)");
  }
  double lo = kChiMin, hi = 1.0;
  while (LogTemplateDelta(n, eps, hi) > log_delta) {
    hi *= 2.0;
    if (hi > 1e300) {
      throw NumericalError("InvertTemplateForChi: bracket failure");
    }
  }
  for (int i = 0; i < 500; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (LogTemplateDelta(n, eps, mid) > log_delta) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-10 * hi) break;
  }
  return 0.5 * (lo + hi);
}

McEstimate McEll0Variance(const RandomizerSpec& spec, const Input& x1,
                          const Input& x1p, const Reference& reference,
                          int64_t samples, uint64_t seed, int threads) {
  spec.Validate();
  if (!IsBlanketLaw(spec, x1) && !IsBlanketLaw(spec, x1p)) {
    throw std::invalid_argument(
        "McEll0Variance: (x1, x1p) must be zero-out adjacent (one side must "
        "have the blanket law)");
  }
  if (samples < 2) {
    throw std::invalid_argument("McEll0Variance: need at least 2 samples");
  }
  const Sampler sampler(spec);
  const Input ref_input = reference.is_blanket()
                              ? Input::Bottom()
                              : Input::Vector(*reference.point);

  constexpr int kShards = 64;
  struct Shard {
    KahanSum s1, s2, s3, s4;
    int64_t count = 0;
  };
  std::vector<Shard> shards(kShards);

  ParallelShards(kShards, threads, [&](int shard) {
    Rng rng(seed, static_cast<uint64_t>(shard));
    const int64_t lo = samples * shard / kShards;
    const int64_t hi = samples * (shard + 1) / kShards;
    Shard& acc = shards[shard];
    for (int64_t i = lo; i < hi; ++i) {
      const Message y = sampler.Sample(ref_input, rng);
      const double num = DensityRatioToBlanket(spec, x1, y) -
                         DensityRatioToBlanket(spec, x1p, y);
      const double den = DensityRatioToBlanket(spec, ref_input, y);
      const double l0 = num / den;
      acc.s1.Add(l0);
      acc.s2.Add(l0 * l0);
      acc.s3.Add(l0 * l0 * l0);
      acc.s4.Add(l0 * l0 * l0 * l0);
      ++acc.count;
    }
  });

  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  int64_t count = 0;
  for (const Shard& sh : shards) {
    s1 += sh.s1.Value();
    s2 += sh.s2.Value();
    s3 += sh.s3.Value();
    s4 += sh.s4.Value();
    count += sh.count;
  }
  const double nf = static_cast<double>(count);
  const double mean = s1 / nf;
  const double m2 = s2 / nf - mean * mean;
  const double var = m2 * nf / (nf - 1.0);
  // Asymptotic variance of the sample variance: (m4 - m2^2) / n.
  const double m4 = s4 / nf - 4.0 * mean * (s3 / nf) +
                    6.0 * mean * mean * (s2 / nf) - 3.0 * mean * mean * mean * mean;
  const double se = std::sqrt(std::max(0.0, m4 - m2 * m2) / nf);
  McEstimate out;
  out.estimate = var;
  out.half_width = kZ975 * se;
  out.samples = count;
  return out;
}

ShuffleIndexReport MakeShuffleIndexReport(const RandomizerSpec& spec,
                                          int64_t mc_samples, uint64_t seed,
                                          int threads) {
  spec.Validate();
  ShuffleIndexReport report;
  switch (spec.family) {
    case Family::kBmg:
      if (spec.gamma == 1.0) {
        // Pure blanket: l_0 vanishes identically and the defining variance is
        // 0; report the infinite-index variant.
        report.chi_lo = IndexValue::Infinite();
        report.note = "gamma = 1: output is input-independent";
      } else {
        report.chi_lo = IndexValue::Finite(ChiLoBmg(spec.gamma, spec.sigma0));
      }
      break;
    case Family::kGaussianLocal:
      // gamma = 0: no blanket mass, so the 1/gamma scaling in chi_lo is
      // undefined; chi_chua is available instead.
      report.chi_chua = ChiChuaGaussian(spec.sigma0);
      report.note =
          "gamma = 0: chi_lo undefined; chi_chua is conjecture-linked, not a "
          "privacy certificate";
      break;
    case Family::kRandomizedResponse:
      report.chi_lo = IndexValue::Finite(ChiLoRr(spec.p));
      break;
    case Family::kPrivUnit: {
      const IndexValue v = ChiLoPrivUnit(spec.p, spec.theta, spec.dim);
      report.chi_lo = v;
      if (v.is_infinite) {
        report.note = "p + q = 1: output is exactly uniform (Delta = 0)";
      }
      break;
    }
  }
  if (mc_samples > 0) {
    // Worst-case adjacent pair (e_1, bottom) under the blanket reference.
    std::vector<double> e1(spec.dim, 0.0);
    e1[0] = 1.0;
    report.mc_variance =
        McEll0Variance(spec, Input::Vector(e1), Input::Bottom(),
                       Reference::Blanket(), mc_samples, seed, threads);
    report.reference = "blanket";
  }
  return report;
}

}  // namespace shuffledp
