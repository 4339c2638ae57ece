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

// Random inputs and independent reference computations shared by the tests.

#ifndef WCNORM_TESTS_TEST_UTIL_HPP_
#define WCNORM_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "wcnorm/linalg.hpp"

namespace wcnorm::testing {

inline Mat random_mat(std::size_t rows, std::size_t cols, std::uint64_t seed,
                      double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Mat m(rows, cols);
  for (double& v : m.values()) v = normal(rng);
  return m;
}

// A A^T / d + 0.1 I: symmetric positive definite, moderately conditioned.
inline Mat random_pd(std::size_t d, std::uint64_t seed) {
  const Mat a = random_mat(d, d, seed);
  Mat s(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += a(i, k) * a(j, k);
      s(i, j) = acc / static_cast<double>(d) + (i == j ? 0.1 : 0.0);
    }
  }
  return s;
}

// Triple-loop product, independent of the library kernels.
inline Mat naive_matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

inline Mat naive_transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

// Sample covariance with divisor m - 1, accumulated pair by pair.
inline Mat naive_covariance(const Mat& x) {
  const std::size_t d = x.rows();
  const std::size_t m = x.cols();
  std::vector<double> mu(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < m; ++i) mu[k] += x(k, i);
    mu[k] /= static_cast<double>(m);
  }
  Mat c(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += (x(a, i) - mu[a]) * (x(b, i) - mu[b]);
      c(a, b) = acc / static_cast<double>(m - 1);
    }
  }
  return c;
}

inline double max_abs_minus_identity(const Mat& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

inline double rel_frobenius(const Mat& a, const Mat& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a.values()[i] - b.values()[i];
    num += diff * diff;
    den += b.values()[i] * b.values()[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Correlated d x m batch with nonzero means: columns A z + offset.
inline Mat correlated_batch(std::size_t d, std::size_t m, std::uint64_t seed) {
  const Mat mix = random_mat(d, d, seed);
  const Mat z = random_mat(d, m, seed + 1);
  Mat x = naive_matmul(mix, z);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < m; ++i) x(k, i) += 0.5 * static_cast<double>(k) - 1.0;
  }
  return x;
}

}  // namespace wcnorm::testing

#endif  // WCNORM_TESTS_TEST_UTIL_HPP_
