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

#ifndef SHUFFLEDP_TOOLS_EXPERIMENT_H_
#define SHUFFLEDP_TOOLS_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shuffledp {

enum class ExperimentKind {
  kUtilityVsEps,
  kProfileVsEps,
  kNScaling,
  kCustomSweep,
};

// Flat key = value config ('#' starts a comment).  Each experiment has a
// fixed required key set; unknown or extra keys are rejected.
//
//   utility-vs-eps: n, delta, sweep (eps values)     [optional: d]
//   profile-vs-eps: n, rmse_target, gamma, sigma0, sweep (eps values)
//   n-scaling:      delta, gamma, sigma0, sweep (n values)
//   custom-sweep:   n, gamma, sigma0, sweep (eps values)
//
// All experiments accept optional seed, output, and grid_points keys.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kUtilityVsEps;
  int64_t n = 0;
  int d = 1;
  double delta = 0.0;
  double rmse_target = 0.0;
  double gamma = 0.0;
  double sigma0 = 0.0;
  std::vector<double> sweep;
  uint64_t seed = 0;
  std::string output;
  int64_t grid_points = 0;

  static ExperimentConfig Parse(const std::string& text);
  static ExperimentConfig ParseFile(const std::string& path);
};

// Runs the experiment and returns the CSV text (header + one row per sweep
// point and mechanism, in sweep order).  Sweep points evaluate in parallel;
// output order and content depend only on (config, seed).  A failing sweep
// point flushes a row with delta_method = "failed".
std::string RunExperiment(const ExperimentConfig& config, int threads);

}  // namespace shuffledp

#endif  // SHUFFLEDP_TOOLS_EXPERIMENT_H_
