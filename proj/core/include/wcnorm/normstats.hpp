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

// Batch statistics for whitening: flattening activation blocks into sample
// matrices, per-batch whitening matrices, running averages and the frozen
// inference transform.

#ifndef WCNORM_NORMSTATS_HPP_
#define WCNORM_NORMSTATS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "wcnorm/linalg.hpp"

namespace wcnorm {

inline constexpr double kDefaultShrinkage = 1e-3;
inline constexpr double kDefaultMomentum = 0.1;

// Activations of n_images feature maps, layout (image, row, col, channel)
// with the channel index fastest.
struct ActivationTensor {
  std::size_t n_images = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  ActivationTensor() = default;
  ActivationTensor(std::size_t n, std::size_t h, std::size_t w, std::size_t d);

  double& at(std::size_t n, std::size_t r, std::size_t c, std::size_t k) {
    return data[((n * height + r) * width + c) * channels + k];
  }
  double at(std::size_t n, std::size_t r, std::size_t c, std::size_t k) const {
    return data[((n * height + r) * width + c) * channels + k];
  }

  bool operator==(const ActivationTensor&) const = default;
};

// One column per spatial location of each image, ordered (image, row, col):
// a d x (n * h * w) sample matrix.
Mat flatten(const ActivationTensor& t);
ActivationTensor unflatten(const Mat& x, std::size_t n_images, std::size_t height,
                           std::size_t width);

struct BatchStats {
  Vec mu;              // batch mean
  Mat sigma;           // shrunk covariance
  LowerTriangular chol;
  Mat w;               // chol^{-1}
  std::size_t m = 0;
};

// Throws DegenerateBatch when m < 2 and NotPositiveDefinite when eps = 0 and
// the batch covariance is singular.
BatchStats compute_batch_stats(const Mat& x_raw, double eps);

// W_B (x - mu_B 1^T).
Mat whiten(const Mat& x_raw, const BatchStats& stats);

enum class WhiteningMethod { cholesky, zca, diagonal };

struct RunningStats {
  Vec mu;
  Mat sigma;
  double momentum = kDefaultMomentum;  // lambda in (0, 1]
  std::uint64_t steps = 0;
  std::optional<Mat> w;  // present only once frozen

  // mu = 0, sigma = I, nothing accumulated.
  static RunningStats initial(std::size_t d, double momentum = kDefaultMomentum);

  std::size_t dim() const noexcept { return mu.size(); }
  bool frozen() const noexcept { return w.has_value(); }
  bool operator==(const RunningStats&) const = default;
};

// sigma <- (1 - lambda) sigma + lambda sigma_B, likewise for mu.
// Throws AlreadyFrozen.
RunningStats update_running(RunningStats rs, const Vec& mu_b, const Mat& sigma_b);
RunningStats update_running(RunningStats rs, const BatchStats& bs);

// Computes the inference whitening matrix from shrink(sigma, eps). Freezing
// again recomputes the same matrix. Throws NoStatisticsAccumulated when no
// update has happened.
RunningStats freeze(RunningStats rs, double eps,
                    WhiteningMethod method = WhiteningMethod::cholesky);

// w (x - mu 1^T) using frozen statistics; throws NotFrozen.
Mat inference_whiten(const Mat& x_raw, const RunningStats& rs);

}  // namespace wcnorm

#endif  // WCNORM_NORMSTATS_HPP_
