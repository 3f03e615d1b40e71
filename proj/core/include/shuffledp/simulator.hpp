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

#ifndef SHUFFLEDP_SIMULATOR_H_
#define SHUFFLEDP_SIMULATOR_H_

#include <cstdint>
#include <vector>

#include "shuffledp/randomizer.hpp"
#include "shuffledp/shuffle_index.hpp"

namespace shuffledp {

// One randomize-shuffle-analyze experiment: n users, a dataset of inputs in
// the mechanism domain, and a trial count.  Trials shard across threads with
// per-shard rng streams; the shard layout is fixed, so results do not depend
// on the thread count.
struct ProtocolRun {
  RandomizerSpec spec;
  int64_t n = 0;
  std::vector<std::vector<double>> inputs;  // size n
  int64_t trials = 0;
  uint64_t seed = 0;
  int threads = 1;

  void Validate() const;
};

// Builds the worst-case dataset: n copies of e_1 (or +1 for RR).
std::vector<std::vector<double>> WorstCaseInputs(const RandomizerSpec& spec,
                                                 int64_t n);

// Random unit-sphere dataset (for PrivUnit-style runs).
std::vector<std::vector<double>> RandomSphereInputs(const RandomizerSpec& spec,
                                                    int64_t n, uint64_t seed);

// Mean squared l2 error of the additive analyzer versus the true mean, with
// a 95% half-width over trials.  Per trial the messages are shuffled
// (Fisher-Yates) and the analyzer output is asserted bit-identical before
// and after the permutation; the analyzer sums each coordinate in ascending
// value order, which makes it exactly permutation-invariant.
McEstimate SimulateMse(const ProtocolRun& run);

// Per-coordinate empirical bias of the analyzer output with 95% half-widths.
struct BiasReport {
  std::vector<double> bias;
  std::vector<double> half_width;
  int64_t trials = 0;
};

BiasReport SimulateUnbiasedness(const ProtocolRun& run);

// Central Gaussian mechanism baseline: the squared l2 norm of
// (sigma/sqrt(n)) Z, Z ~ N(0, I_d), averaged over trials (the true mean
// cancels exactly).
McEstimate SimulateGmMse(double sigma, int64_t n, int d, int64_t trials,
                         uint64_t seed, int threads = 1);

}  // namespace shuffledp

#endif  // SHUFFLEDP_SIMULATOR_H_
