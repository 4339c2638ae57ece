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

#include <cmath>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {
namespace {

void normalize_train(const Mat& x_raw, ForwardCache& c, RunningStats& running) {
  const LayerConfig& cfg = c.cfg;
  switch (cfg.norm) {
    case NormMode::none:
      c.x_hat = x_raw;
      return;
    case NormMode::whiten_cholesky: {
      BatchStats bs = compute_batch_stats(x_raw, cfg.eps);
      c.x_centered = center_rows(x_raw, bs.mu);
      c.x_hat = matmul(bs.w, c.x_centered);
      running = update_running(std::move(running), bs);
      c.mu = std::move(bs.mu);
      c.sigma = std::move(bs.sigma);
      c.chol = std::move(bs.chol);
      c.w = std::move(bs.w);
      return;
    }
    case NormMode::whiten_zca: {
      c.mu = row_means(x_raw);
      c.sigma = shrink(empirical_covariance(x_raw, c.mu), cfg.eps);
      c.x_centered = center_rows(x_raw, c.mu);
      c.eig = symmetric_eigendecomposition(c.sigma);
      c.w = zca_whitening_matrix(c.eig);
      c.x_hat = matmul(c.w, c.x_centered);
      running = update_running(std::move(running), c.mu, c.sigma);
      return;
    }
    case NormMode::standardize: {
      const std::size_t d = x_raw.rows();
      const std::size_t m = x_raw.cols();
      if (m < 2) {
        throw DegenerateBatch(fmt::format("standardize: need at least 2 samples, got {}", m));
      }
      c.mu = row_means(x_raw);
      c.x_centered = center_rows(x_raw, c.mu);
      c.inv_std = Vec(d);
      Vec var(d);
      c.x_hat = Mat(d, m);
      for (std::size_t k = 0; k < d; ++k) {
        const double* xr = c.x_centered.row(k).data();
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) ss += xr[i] * xr[i];
        var[k] = (1.0 - cfg.eps) * (ss / static_cast<double>(m - 1)) + cfg.eps;
        if (!(var[k] > 0.0)) {
          throw NotPositiveDefinite(
              fmt::format("standardize: non-positive variance at channel {}", k), k);
        }
        c.inv_std[k] = 1.0 / std::sqrt(var[k]);
        double* out = c.x_hat.row(k).data();
        for (std::size_t i = 0; i < m; ++i) out[i] = xr[i] * c.inv_std[k];
      }
      c.w = Mat::diagonal(c.inv_std);
      running = update_running(std::move(running), c.mu, Mat::diagonal(var));
      return;
    }
  }
}

void normalize_infer(const Mat& x_raw, ForwardCache& c, const RunningStats& running) {
  if (c.cfg.norm == NormMode::none) {
    c.x_hat = x_raw;
    return;
  }
  c.x_hat = inference_whiten(x_raw, running);
  c.mu = running.mu;
  c.w = *running.w;
  c.x_centered = center_rows(x_raw, c.mu);
}

}  // namespace

LayerOutput wc_forward(const Mat& x_raw, std::span<const int> labels,
                       const ColoringParams& params, const LayerConfig& cfg,
                       ForwardMode mode, RunningStats& running) {
  cfg.validate();
  params.validate(cfg);
  if (x_raw.rows() != cfg.d) {
    throw ShapeError(fmt::format("wc_forward: input has {} channels, layer expects {}",
                                 x_raw.rows(), cfg.d));
  }
  if (cfg.conditional() && labels.size() != x_raw.cols()) {
    throw ShapeError(fmt::format("wc_forward: {} labels for {} columns", labels.size(),
                                 x_raw.cols()));
  }
  LayerOutput out;
  ForwardCache& c = out.cache;
  c.cfg = cfg;
  c.mode = mode;
  if (cfg.conditional()) c.labels.assign(labels.begin(), labels.end());

  if (mode == ForwardMode::train) {
    normalize_train(x_raw, c, running);
  } else {
    normalize_infer(x_raw, c, running);
  }

  if (cfg.color == ColorMode::none) {
    out.y = c.x_hat;
  } else if (cfg.conditional()) {
    out.y = cond_color_forward(c.x_hat, c.labels, params, cfg);
  } else {
    out.y = color_forward(c.x_hat, params);
  }
  return out;
}

LayerGrads wc_backward(const Mat& y_bar, ForwardCache& cache, const ColoringParams& params) {
  if (cache.consumed) {
    throw CacheMismatch("wc_backward: forward cache was already consumed");
  }
  LayerGrads g = coloring_backward(y_bar, cache, params);
  g.d_input = normalization_backward(g.d_input, cache);
  cache.consumed = true;
  return g;
}

WCLayer::WCLayer(LayerConfig cfg, std::uint64_t seed)
    : cfg_(cfg), params_(init_params(cfg, seed)),
      running_(RunningStats::initial(cfg.d, cfg.momentum)) {}

WCLayer::WCLayer(LayerConfig cfg, ColoringParams params)
    : cfg_(cfg), params_(std::move(params)),
      running_(RunningStats::initial(cfg.d, cfg.momentum)) {
  cfg_.validate();
  params_.validate(cfg_);
}

Mat WCLayer::forward(const Mat& x, std::span<const int> labels, ForwardMode mode) {
  LayerOutput out = wc_forward(x, labels, params_, cfg_, mode, running_);
  cache_ = std::move(out.cache);
  return std::move(out.y);
}

LayerGrads WCLayer::backward(const Mat& y_bar) {
  if (!cache_) throw CacheMismatch("WCLayer::backward: no forward pass to differentiate");
  return wc_backward(y_bar, *cache_, params_);
}

WhiteningMethod WCLayer::whitening_method() const noexcept {
  switch (cfg_.norm) {
    case NormMode::whiten_zca: return WhiteningMethod::zca;
    case NormMode::standardize: return WhiteningMethod::diagonal;
    default: return WhiteningMethod::cholesky;
  }
}

void WCLayer::freeze() {
  if (cfg_.norm == NormMode::none) return;
  running_ = wcnorm::freeze(std::move(running_), cfg_.eps, whitening_method());
}

}  // namespace wcnorm
