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

#include "wcnorm/normstats.hpp"

#include <cmath>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm {

ActivationTensor::ActivationTensor(std::size_t n, std::size_t h, std::size_t w,
                                   std::size_t d)
    : n_images(n), height(h), width(w), channels(d), data(n * h * w * d, 0.0) {}

Mat flatten(const ActivationTensor& t) {
  if (t.data.size() != t.n_images * t.height * t.width * t.channels) {
    throw ShapeError(fmt::format("flatten: {} values for a {}x{}x{}x{} tensor",
                                 t.data.size(), t.n_images, t.height, t.width,
                                 t.channels));
  }
  const std::size_t m = t.n_images * t.height * t.width;
  Mat x(t.channels, m);
  for (std::size_t col = 0; col < m; ++col) {
    const double* sample = t.data.data() + col * t.channels;
    for (std::size_t k = 0; k < t.channels; ++k) x(k, col) = sample[k];
  }
  return x;
}

ActivationTensor unflatten(const Mat& x, std::size_t n_images, std::size_t height,
                           std::size_t width) {
  if (x.cols() != n_images * height * width) {
    throw ShapeError(fmt::format("unflatten: {} columns cannot form {}x{}x{}",
                                 x.cols(), n_images, height, width));
  }
  ActivationTensor t(n_images, height, width, x.rows());
  for (std::size_t col = 0; col < x.cols(); ++col) {
    double* sample = t.data.data() + col * t.channels;
    for (std::size_t k = 0; k < t.channels; ++k) sample[k] = x(k, col);
  }
  return t;
}

BatchStats compute_batch_stats(const Mat& x_raw, double eps) {
  if (x_raw.cols() < 2) {
    throw DegenerateBatch(
        fmt::format("compute_batch_stats: need at least 2 samples, got {}", x_raw.cols()));
  }
  Vec mu = row_means(x_raw);
  Mat sigma = shrink(empirical_covariance(x_raw, mu), eps);
  LowerTriangular chol = cholesky(sigma);
  Mat w = invert_lower_triangular(chol);
  return BatchStats{std::move(mu), std::move(sigma), std::move(chol), std::move(w),
                    x_raw.cols()};
}

Mat whiten(const Mat& x_raw, const BatchStats& stats) {
  if (x_raw.rows() != stats.w.rows()) {
    throw ShapeError(fmt::format("whiten: batch has {} channels, statistics have {}",
                                 x_raw.rows(), stats.w.rows()));
  }
  return matmul(stats.w, center_rows(x_raw, stats.mu));
}

RunningStats RunningStats::initial(std::size_t d, double momentum) {
  if (!(momentum > 0.0 && momentum <= 1.0)) {
    throw InvalidParameter(fmt::format("running statistics: lambda={} outside (0, 1]", momentum));
  }
  RunningStats rs;
  rs.mu = Vec(d, 0.0);
  rs.sigma = Mat::identity(d);
  rs.momentum = momentum;
  return rs;
}

RunningStats update_running(RunningStats rs, const Vec& mu_b, const Mat& sigma_b) {
  if (rs.frozen()) throw AlreadyFrozen("update_running: statistics are frozen");
  if (mu_b.size() != rs.dim() || sigma_b.rows() != rs.dim() || sigma_b.cols() != rs.dim()) {
    throw ShapeError(fmt::format("update_running: batch of dim {} for running dim {}",
                                 mu_b.size(), rs.dim()));
  }
  const double keep = 1.0 - rs.momentum;
  for (std::size_t i = 0; i < rs.mu.size(); ++i) {
    rs.mu[i] = keep * rs.mu[i] + rs.momentum * mu_b[i];
  }
  auto s = rs.sigma.values();
  auto b = sigma_b.values();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = keep * s[i] + rs.momentum * b[i];
  ++rs.steps;
  return rs;
}

RunningStats update_running(RunningStats rs, const BatchStats& bs) {
  return update_running(std::move(rs), bs.mu, bs.sigma);
}

RunningStats freeze(RunningStats rs, double eps, WhiteningMethod method) {
  if (rs.steps == 0) {
    throw NoStatisticsAccumulated("freeze: no batch statistics have been accumulated");
  }
  const Mat target = shrink(rs.sigma, eps);
  switch (method) {
    case WhiteningMethod::cholesky:
      rs.w = invert_lower_triangular(cholesky(target));
      break;
    case WhiteningMethod::zca:
      rs.w = zca_whitening_matrix(target);
      break;
    case WhiteningMethod::diagonal: {
      Vec inv(target.rows());
      for (std::size_t i = 0; i < inv.size(); ++i) {
        if (!(target(i, i) > 0.0)) {
          throw NotPositiveDefinite(
              fmt::format("freeze: non-positive running variance at index {}", i), i);
        }
        inv[i] = 1.0 / std::sqrt(target(i, i));
      }
      rs.w = Mat::diagonal(inv);
      break;
    }
  }
  return rs;
}

Mat inference_whiten(const Mat& x_raw, const RunningStats& rs) {
  if (!rs.frozen()) throw NotFrozen("inference_whiten: running statistics are not frozen");
  if (x_raw.rows() != rs.dim()) {
    throw ShapeError(fmt::format("inference_whiten: batch has {} channels, statistics have {}",
                                 x_raw.rows(), rs.dim()));
  }
  return matmul(*rs.w, center_rows(x_raw, rs.mu));
}

}  // namespace wcnorm
