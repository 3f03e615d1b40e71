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

#ifndef SHUFFLEDP_RANDOMIZER_H_
#define SHUFFLEDP_RANDOMIZER_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shuffledp/numerics.hpp"
#include "shuffledp/rng.hpp"

namespace shuffledp {

enum class Family {
  kBmg,             // blanket-mixed Gaussian
  kGaussianLocal,   // gamma = 0 Gaussian
  kRandomizedResponse,
  kPrivUnit,
};

std::string FamilyName(Family family);

// Parameters of a local randomizer.  Use the factory functions; Validate()
// enforces the per-family domains.
struct RandomizerSpec {
  Family family = Family::kBmg;
  int dim = 1;
  double gamma = 0.0;   // blanket mass, BMG only (GaussianLocal is gamma = 0)
  double sigma0 = 0.0;  // Gaussian scale, BMG / GaussianLocal
  double p = 0.0;       // RR / PrivUnit
  double theta = 0.0;   // PrivUnit cap threshold

  static RandomizerSpec Bmg(int dim, double gamma, double sigma0);
  static RandomizerSpec GaussianLocal(int dim, double sigma0);
  static RandomizerSpec RandomizedResponse(double p);
  static RandomizerSpec PrivUnit(int dim, double p, double theta);

  void Validate() const;
};

// One user message: a vector of dim reals; RR messages are {-1,+1} in a
// one-element vector.
using Message = std::vector<double>;

// A user input: a vector in the mechanism domain, or bottom (the zero-out
// symbol), whose output is defined as the blanket distribution.
struct Input {
  static Input Bottom() { return Input{}; }
  static Input Vector(std::vector<double> v) {
    Input in;
    in.value = std::move(v);
    return in;
  }
  static Input Scalar(double x) { return Vector({x}); }

  bool is_bottom() const { return !value.has_value(); }

  std::optional<std::vector<double>> value;
};

// Checks the input against the spec domain and returns the (possibly
// renormalized) vector.  Norm violations up to 1e-9 are renormalized; larger
// ones are rejected.
std::vector<double> ValidateInput(const RandomizerSpec& spec,
                                  const std::vector<double>& x);

// Sampler for one randomizer.  Construction precomputes the PrivUnit
// inverse-CDF tables; sampling is const and reentrant, with the caller
// supplying independent rng streams for parallel use.
class Sampler {
 public:
  explicit Sampler(const RandomizerSpec& spec);
  ~Sampler();

  Sampler(Sampler&&) noexcept;
  Sampler& operator=(Sampler&&) noexcept;

  const RandomizerSpec& spec() const { return spec_; }

  Message Sample(const Input& input, Rng& rng) const;

  // Draws from the blanket distribution (the bottom-input output law).
  Message SampleBlanket(Rng& rng) const { return Sample(Input::Bottom(), rng); }

 private:
  struct PrivUnitTables;

  RandomizerSpec spec_;
  std::unique_ptr<PrivUnitTables> privunit_;
};

// Every family's universal unbiased estimator is linear: Y * EstimatorScale.
// BMG 1/(1-gamma), GaussianLocal 1, RR 1/(2p-1), PrivUnit 1/m with
// m = alpha * Delta / q.  Throws when the scale is degenerate (gamma = 1,
// p = 1/2, or m = 0).
double EstimatorScale(const RandomizerSpec& spec);

std::vector<double> Estimate(const RandomizerSpec& spec, const Message& msg);

// log of dR_x/dR_BG at msg, for BMG and GaussianLocal.
double LogLikelihoodRatioToBlanket(const RandomizerSpec& spec,
                                   const std::vector<double>& input,
                                   const Message& msg);

// dR_input/dR_BG(msg) for any family (bottom input gives 1 identically).
// Ratios are taken against the blanket, so the base measure cancels.
double DensityRatioToBlanket(const RandomizerSpec& spec, const Input& input,
                             const Message& msg);

// True when the output law of `input` equals the blanket: bottom always;
// the zero vector for BMG / GaussianLocal.
bool IsBlanketLaw(const RandomizerSpec& spec, const Input& input);

}  // namespace shuffledp

#endif  // SHUFFLEDP_RANDOMIZER_H_
