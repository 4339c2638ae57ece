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

// Spectral normalization W / sigma(W) with a persistent power-iteration
// estimate of the top singular pair.

#ifndef WCNORM_SPECTRAL_NORM_HPP_
#define WCNORM_SPECTRAL_NORM_HPP_

#include <cstddef>
#include <cstdint>

#include "wcnorm/linalg.hpp"

namespace wcnorm {

struct SpectralState {
  Vec u;  // left singular vector estimate, size rows
  Vec v;  // right singular vector estimate, size cols
  double sigma = 0.0;

  bool operator==(const SpectralState&) const = default;
};

// Random unit u for a matrix with `rows` rows.
SpectralState init_spectral_state(std::size_t rows, std::size_t cols, std::uint64_t seed);

// `iterations` power-iteration steps (at least one on a fresh state), then
// W / (u^T W v). Throws DegenerateWeight for a zero matrix or a collapsed
// estimate.
Mat spectral_normalize(const Mat& w, SpectralState& state, std::size_t iterations = 1);

// Gradient with respect to W given the gradient G with respect to W_sn,
// treating u and v as constants: (G - <G, W_sn> u v^T) / sigma.
Mat spectral_backward(const Mat& g_sn, const Mat& w_sn, const SpectralState& state);

}  // namespace wcnorm

#endif  // WCNORM_SPECTRAL_NORM_HPP_
