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

#ifndef SHUFFLEDP_RNG_H_
#define SHUFFLEDP_RNG_H_

#include <array>
#include <cstdint>

namespace shuffledp {

// Seeded, splittable random source with a fixed documented algorithm so all
// Monte Carlo results are bit-reproducible given (seed, stream).
//
// Stream derivation: the four xoshiro256++ state words are the first four
// outputs of splitmix64 initialized at seed ^ (0x9E3779B97F4A7C15 * (stream+1)).
// Uniform doubles take the top 53 bits of the 64-bit output; Gaussians use the
// Marsaglia polar method.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t NextU64();

  // Uniform in [0, 1).
  double NextUnit();

  // Uniform integer in [0, bound) by rejection (unbiased).
  uint64_t NextBelow(uint64_t bound);

  // Standard normal.
  double NextGaussian();

  // Bernoulli(p).
  bool NextBernoulli(double p) { return NextUnit() < p; }

 private:
  std::array<uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shuffledp

#endif  // SHUFFLEDP_RNG_H_
