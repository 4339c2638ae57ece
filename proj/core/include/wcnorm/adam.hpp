/* Copyright 2026 The wcnorm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Adam optimizer state and update.

#ifndef WCNORM_ADAM_HPP_
#define WCNORM_ADAM_HPP_

#include <cstdint>
#include <span>

#include "wcnorm/linalg.hpp"

namespace wcnorm {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double eps = 1e-8;
};

struct AdamState {
  Vec m;
  Vec v;
  std::uint64_t t = 0;

  bool operator==(const AdamState&) const = default;
};

// Bias-corrected update of `param` in place; sizes the state on first use.
// Throws ShapeError when param and grad sizes differ.
void adam_step(const AdamConfig& cfg, AdamState& state, std::span<double> param,
               std::span<const double> grad);

}  // namespace wcnorm

#endif  // WCNORM_ADAM_HPP_
