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

// Reverse-mode sensitivities of the normalization step.
//
// With X the centered batch (d x m), Sigma = (1 - eps) X X^T / (m - 1) + eps I,
// W the whitening matrix and Y = W X, the whitening modes share the chain
//
//   X_bar = 2 (1 - eps) / (m - 1) * Sigma_bar X + W^T Y_bar
//
// followed by the centering rule X_raw_bar = X_bar - rowmean(X_bar). Only
// Sigma_bar differs: Cholesky uses the triangular-factor rule with the
// matrix P (ones below the diagonal, 1/2 on it); ZCA goes through the
// eigendecomposition.

#include <cmath>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {
namespace {

void require_live(const Mat& y_bar, const ForwardCache& cache, const char* who) {
  if (cache.consumed) {
    throw CacheMismatch(fmt::format("{}: forward cache was already consumed", who));
  }
  if (y_bar.rows() != cache.x_hat.rows() || y_bar.cols() != cache.x_hat.cols()) {
    throw ShapeError(fmt::format("{}: gradient is {}x{}, forward output was {}x{}", who,
                                 y_bar.rows(), y_bar.cols(), cache.x_hat.rows(),
                                 cache.x_hat.cols()));
  }
}

void subtract_row_means(Mat& x) {
  const Vec mu = row_means(x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double& v : x.row(r)) v -= mu[r];
  }
}

// Shared tail: covariance stream plus direct stream, then centering.
Mat combine_streams(const Mat& sigma_bar, const Mat& y_bar, const ForwardCache& cache) {
  const double m = static_cast<double>(cache.x_centered.cols());
  const double scale = 2.0 * (1.0 - cache.cfg.eps) / (m - 1.0);
  Mat x_bar = scale * matmul(sigma_bar, cache.x_centered);
  x_bar += matmul_tn(cache.w, y_bar);
  subtract_row_means(x_bar);
  return x_bar;
}

Mat standardize_backward(const Mat& y_bar, const ForwardCache& cache) {
  const Mat& x = cache.x_centered;
  const std::size_t d = x.rows();
  const std::size_t m = x.cols();
  const double a = 1.0 - cache.cfg.eps;
  Mat x_bar(d, m);
  for (std::size_t k = 0; k < d; ++k) {
    const double w = cache.inv_std[k];
    const double* xr = x.row(k).data();
    const double* yb = y_bar.row(k).data();
    double w_bar = 0.0;
    for (std::size_t i = 0; i < m; ++i) w_bar += yb[i] * xr[i];
    // Scalar case of the whitening rule: Sigma_bar = -w^3 w_bar / 2.
    const double var_bar = -0.5 * w * w * w * w_bar;
    const double scale = 2.0 * a / static_cast<double>(m - 1) * var_bar;
    double* out = x_bar.row(k).data();
    for (std::size_t i = 0; i < m; ++i) out[i] = scale * xr[i] + w * yb[i];
  }
  subtract_row_means(x_bar);
  return x_bar;
}

Mat zca_backward(const Mat& y_bar, const ForwardCache& cache) {
  const std::size_t d = cache.w.rows();
  const Mat& v = cache.eig.vectors;
  const Vec& lambda = cache.eig.values;

  const Mat w_bar = matmul_nt(y_bar, cache.x_centered);
  Vec inv_sqrt(d);
  for (std::size_t k = 0; k < d; ++k) inv_sqrt[k] = 1.0 / std::sqrt(lambda[k]);

  // W = V D V^T with D = diag(lambda^{-1/2}):
  //   V_bar = (W_bar + W_bar^T) V D,  lambda_bar_k = -(V^T W_bar V)_kk lambda_k^{-3/2} / 2
  Mat v_bar = matmul(w_bar + transpose(w_bar), v);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t k = 0; k < d; ++k) v_bar(r, k) *= inv_sqrt[k];
  }
  const Mat vt_wbar_v = matmul_tn(v, matmul(w_bar, v));

  // Symmetric eigendecomposition rule:
  //   Sigma_bar = V (diag(lambda_bar) + F o (V^T V_bar)) V^T,
  //   F_ij = 1 / (lambda_j - lambda_i) off the diagonal.
  // F is ill-conditioned when eigenvalues nearly coincide.
  Mat inner = matmul_tn(v, v_bar);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) {
        inner(i, i) = -0.5 * vt_wbar_v(i, i) * inv_sqrt[i] * inv_sqrt[i] * inv_sqrt[i];
      } else {
        inner(i, j) /= (lambda[j] - lambda[i]);
      }
    }
  }
  const Mat sigma_bar = symmetrize(matmul_nt(matmul(v, inner), v));
  return combine_streams(sigma_bar, y_bar, cache);
}

}  // namespace

Mat whitening_backward(const Mat& y_bar, const ForwardCache& cache) {
  require_live(y_bar, cache, "whitening_backward");
  if (cache.mode != ForwardMode::train || cache.cfg.norm != NormMode::whiten_cholesky ||
      !cache.chol) {
    throw CacheMismatch("whitening_backward: cache is not from a Cholesky-whitening train pass");
  }
  const Mat& w = cache.w;
  const std::size_t d = w.rows();

  const Mat w_bar = matmul_nt(y_bar, cache.x_centered);  // Y_bar X^T
  // L_bar = -W^T W_bar W^T, so L^T L_bar = -W_bar W^T.
  Mat s = matmul_nt(w_bar, w);
  // P o (W_bar W^T): keep the lower triangle, halve the diagonal.
  for (std::size_t i = 0; i < d; ++i) {
    s(i, i) *= 0.5;
    for (std::size_t j = i + 1; j < d; ++j) s(i, j) = 0.0;
  }
  const Mat sym = s + transpose(s);
  Mat sigma_bar = matmul_tn(w, matmul(sym, w));
  sigma_bar *= -0.5;
  return combine_streams(sigma_bar, y_bar, cache);
}

Mat normalization_backward(const Mat& x_hat_bar, const ForwardCache& cache) {
  require_live(x_hat_bar, cache, "normalization_backward");
  if (cache.cfg.norm == NormMode::none) return x_hat_bar;
  if (cache.mode == ForwardMode::infer) {
    // Frozen statistics: a fixed affine map per column.
    return matmul_tn(cache.w, x_hat_bar);
  }
  switch (cache.cfg.norm) {
    case NormMode::standardize:
      return standardize_backward(x_hat_bar, cache);
    case NormMode::whiten_cholesky:
      return whitening_backward(x_hat_bar, cache);
    case NormMode::whiten_zca:
      return zca_backward(x_hat_bar, cache);
    case NormMode::none:
      break;
  }
  return x_hat_bar;
}

}  // namespace wcnorm
