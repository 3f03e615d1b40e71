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

#include "shuffledp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shuffledp/errors.hpp"
#include "shuffledp/parallel.hpp"

namespace shuffledp {

namespace {

constexpr double kZ975 = 1.959963984540054;
constexpr int kShards = 256;

// Additive analyzer: per-coordinate mean of the per-message estimates.  Every
// estimator is linear, so the mean message is scaled once; each coordinate is
// summed in ascending value order, which makes the reduction a function of
// the multiset of messages only, hence exactly permutation-invariant.
std::vector<double> AdditiveAnalyzer(int d, double estimator_scale,
                                     const std::vector<Message>& messages,
                                     std::vector<double>& scratch) {
  const double factor = estimator_scale / static_cast<double>(messages.size());
  std::vector<double> out(d, 0.0);
  scratch.resize(messages.size());
  for (int c = 0; c < d; ++c) {
    for (size_t i = 0; i < messages.size(); ++i) scratch[i] = messages[i][c];
    std::sort(scratch.begin(), scratch.end());
    double s = 0.0;
    for (double v : scratch) s += v;
    out[c] = s * factor;
  }
  return out;
}

void FisherYates(std::vector<Message>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = rng.NextBelow(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

void ProtocolRun::Validate() const {
  spec.Validate();
  if (n < 1) throw std::invalid_argument("ProtocolRun: n must be >= 1");
  if (trials < 1) throw std::invalid_argument("ProtocolRun: trials must be >= 1");
  if (static_cast<int64_t>(inputs.size()) != n) {
    throw std::invalid_argument("ProtocolRun: inputs must have n entries");
  }
  for (const auto& x : inputs) ValidateInput(spec, x);
}

std::vector<std::vector<double>> WorstCaseInputs(const RandomizerSpec& spec,
                                                 int64_t n) {
  std::vector<double> e1(spec.dim, 0.0);
  e1[0] = 1.0;
  return std::vector<std::vector<double>>(static_cast<size_t>(n), e1);
}

std::vector<std::vector<double>> RandomSphereInputs(const RandomizerSpec& spec,
                                                    int64_t n, uint64_t seed) {
  Rng rng(seed, 0xD1CE);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    std::vector<double> x(spec.dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : x) {
        v = rng.NextGaussian();
        norm += v * v;
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (auto& v : x) v /= norm;
    if (spec.family == Family::kRandomizedResponse) {
      x = {x[0] >= 0.0 ? 1.0 : -1.0};
    }
    out.push_back(std::move(x));
  }
  return out;
}

McEstimate SimulateMse(const ProtocolRun& run) {
  run.Validate();
  if (run.spec.family == Family::kBmg && run.spec.gamma == 1.0) {
    throw std::invalid_argument(
        "SimulateMse: gamma = 1 has no unbiased estimator");
  }
  const Sampler sampler(run.spec);
  const int d = run.spec.dim;
  const double scale = EstimatorScale(run.spec);

  std::vector<double> true_mean(d, 0.0);
  for (const auto& x : run.inputs) {
    for (int c = 0; c < d; ++c) true_mean[c] += x[c];
  }
  for (double& v : true_mean) v /= static_cast<double>(run.n);

  std::vector<Input> wrapped;
  wrapped.reserve(run.inputs.size());
  for (const auto& x : run.inputs) wrapped.push_back(Input::Vector(x));

  struct Shard {
    KahanSum s1, s2;
    int64_t count = 0;
  };
  std::vector<Shard> shards(kShards);

  ParallelShards(kShards, run.threads, [&](int shard) {
    Rng rng(run.seed, static_cast<uint64_t>(shard));
    const int64_t lo = run.trials * shard / kShards;
    const int64_t hi = run.trials * (shard + 1) / kShards;
    Shard& acc = shards[shard];
    std::vector<Message> messages(static_cast<size_t>(run.n));
    std::vector<double> scratch;
    for (int64_t t = lo; t < hi; ++t) {
      for (int64_t i = 0; i < run.n; ++i) {
        messages[static_cast<size_t>(i)] =
            sampler.Sample(wrapped[static_cast<size_t>(i)], rng);
      }
      const std::vector<double> before =
          AdditiveAnalyzer(d, scale, messages, scratch);
      FisherYates(messages, rng);
      const std::vector<double> after =
          AdditiveAnalyzer(d, scale, messages, scratch);
      for (int c = 0; c < d; ++c) {
        if (before[c] != after[c]) {
          throw NumericalError(
              "SimulateMse: analyzer output changed under permutation");
        }
      }
      double err = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff = after[c] - true_mean[c];
        err += diff * diff;
      }
      acc.s1.Add(err);
      acc.s2.Add(err * err);
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
  McEstimate out;
  out.estimate = mean;
  out.half_width = kZ975 * std::sqrt(var / nf);
  out.samples = count;
  return out;
}

BiasReport SimulateUnbiasedness(const ProtocolRun& run) {
  run.Validate();
  const Sampler sampler(run.spec);
  const int d = run.spec.dim;
  const double scale = EstimatorScale(run.spec);

  std::vector<double> true_mean(d, 0.0);
  for (const auto& x : run.inputs) {
    for (int c = 0; c < d; ++c) true_mean[c] += x[c];
  }
  for (double& v : true_mean) v /= static_cast<double>(run.n);

  std::vector<Input> wrapped;
  wrapped.reserve(run.inputs.size());
  for (const auto& x : run.inputs) wrapped.push_back(Input::Vector(x));

  struct Shard {
    std::vector<KahanSum> s1, s2;
    int64_t count = 0;
  };
  std::vector<Shard> shards(kShards);
  for (auto& sh : shards) {
    sh.s1.resize(d);
    sh.s2.resize(d);
  }

  ParallelShards(kShards, run.threads, [&](int shard) {
    Rng rng(run.seed, static_cast<uint64_t>(shard));
    const int64_t lo = run.trials * shard / kShards;
    const int64_t hi = run.trials * (shard + 1) / kShards;
    Shard& acc = shards[shard];
    std::vector<Message> messages(static_cast<size_t>(run.n));
    std::vector<double> scratch;
    for (int64_t t = lo; t < hi; ++t) {
      for (int64_t i = 0; i < run.n; ++i) {
        messages[static_cast<size_t>(i)] =
            sampler.Sample(wrapped[static_cast<size_t>(i)], rng);
      }
      FisherYates(messages, rng);
      const std::vector<double> est =
          AdditiveAnalyzer(d, scale, messages, scratch);
      for (int c = 0; c < d; ++c) {
        acc.s1[c].Add(est[c]);
        acc.s2[c].Add(est[c] * est[c]);
      }
      ++acc.count;
    }
  });

  BiasReport report;
  report.bias.resize(d);
  report.half_width.resize(d);
  int64_t count = 0;
  for (const Shard& sh : shards) count += sh.count;
  report.trials = count;
  const double nf = static_cast<double>(count);
  for (int c = 0; c < d; ++c) {
    double s1 = 0.0, s2 = 0.0;
    for (const Shard& sh : shards) {
      s1 += sh.s1[c].Value();
      s2 += sh.s2[c].Value();
    }
    const double mean = s1 / nf;
    const double var = std::max(0.0, s2 / nf - mean * mean) * nf / (nf - 1.0);
    report.bias[c] = mean - true_mean[c];
    report.half_width[c] = kZ975 * std::sqrt(var / nf);
  }
  return report;
}

McEstimate SimulateGmMse(double sigma, int64_t n, int d, int64_t trials,
                         uint64_t seed, int threads) {
  if (!(sigma > 0.0)) throw std::invalid_argument("SimulateGmMse: sigma must be > 0");
  if (n < 1 || d < 1 || trials < 1) {
    throw std::invalid_argument("SimulateGmMse: n, d, trials must be >= 1");
  }
  const double scale = sigma / std::sqrt(static_cast<double>(n));

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
    for (int64_t t = lo; t < hi; ++t) {
      double err = 0.0;
      for (int c = 0; c < d; ++c) {
        const double z = scale * rng.NextGaussian();
        err += z * z;
      }
      acc.s1.Add(err);
      acc.s2.Add(err * err);
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
  McEstimate out;
  out.estimate = mean;
  out.half_width = kZ975 * std::sqrt(var / nf);
  out.samples = count;
  return out;
}

}  // namespace shuffledp
