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

#ifndef SHUFFLEDP_ERRORS_H_
#define SHUFFLEDP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace shuffledp {

// Parameter/domain violations throw std::invalid_argument (CLI exit code 2).
// Numerical failures (bracketing, grid refinement) throw NumericalError
// (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shuffledp

#endif  // SHUFFLEDP_ERRORS_H_
