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
#include <numeric>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {
namespace {

// Column indices grouped by class. Unconditional layers use one group.
std::vector<std::vector<std::size_t>> columns_by_class(std::span<const int> labels,
                                                       const LayerConfig& cfg,
                                                       std::size_t m) {
  if (!cfg.conditional()) {
    std::vector<std::vector<std::size_t>> all(1, std::vector<std::size_t>(m));
    std::iota(all[0].begin(), all[0].end(), std::size_t{0});
    return all;
  }
  if (labels.size() != m) {
    throw ShapeError(fmt::format("conditional coloring: {} labels for {} columns",
                                 labels.size(), m));
  }
  std::vector<std::vector<std::size_t>> groups(cfg.n_classes);
  for (std::size_t i = 0; i < m; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= cfg.n_classes) {
      throw UnknownClass(
          fmt::format("label {} at column {} outside [0, {})", y, i, cfg.n_classes));
    }
    groups[static_cast<std::size_t>(y)].push_back(i);
  }
  return groups;
}

struct EffectiveColoring {
  Vec gamma;  // color_width coefficients
  Vec beta;
};

EffectiveColoring effective_coloring(const ColoringParams& p, const LayerConfig& cfg,
                                     std::size_t y) {
  EffectiveColoring e{Vec(cfg.color_width(), 0.0), Vec(cfg.d, 0.0)};
  if (cfg.has_agnostic_term()) {
    std::copy(p.gamma.values().begin(), p.gamma.values().end(), e.gamma.begin());
    e.beta = p.beta;
  }
  if (!cfg.conditional()) return e;
  if (cfg.class_bank()) {
    const auto row = p.gamma_bank.row(y);
    for (std::size_t c = 0; c < e.gamma.size(); ++c) e.gamma[c] += row[c];
  } else {
    const auto a = p.assoc.row(y);
    for (std::size_t j = 0; j < a.size(); ++j) {
      const auto dj = p.dict.row(j);
      for (std::size_t c = 0; c < e.gamma.size(); ++c) e.gamma[c] += a[j] * dj[c];
    }
  }
  const auto by = p.beta_bank.row(y);
  for (std::size_t k = 0; k < cfg.d; ++k) e.beta[k] += by[k];
  return e;
}

// out[:, cols] = G x_hat[:, cols] + beta, accumulating over input channels
// in ascending order.
void apply_coloring(const EffectiveColoring& e, bool full, const Mat& x_hat,
                    const std::vector<std::size_t>& cols, Mat& out) {
  const std::size_t d = x_hat.rows();
  for (std::size_t k = 0; k < d; ++k) {
    double* out_row = out.row(k).data();
    if (full) {
      for (std::size_t j = 0; j < d; ++j) {
        const double g = e.gamma[k * d + j];
        const double* x_row = x_hat.row(j).data();
        for (std::size_t i : cols) out_row[i] += g * x_row[i];
      }
    } else {
      const double g = e.gamma[k];
      const double* x_row = x_hat.row(k).data();
      for (std::size_t i : cols) out_row[i] += g * x_row[i];
    }
    for (std::size_t i : cols) out_row[i] += e.beta[k];
  }
}

Mat color_all(const Mat& x_hat, std::span<const int> labels, const ColoringParams& params,
              const LayerConfig& cfg) {
  const auto groups = columns_by_class(labels, cfg, x_hat.cols());
  Mat out(x_hat.rows(), x_hat.cols());
  const bool full = cfg.color == ColorMode::full;
  for (std::size_t y = 0; y < groups.size(); ++y) {
    if (groups[y].empty()) continue;
    apply_coloring(effective_coloring(params, cfg, y), full, x_hat, groups[y], out);
  }
  return out;
}

}  // namespace

Mat bn_forward(const Mat& x, const BNParams& params, double eps,
               std::span<const int> labels) {
  const std::size_t d = x.rows();
  const std::size_t m = x.cols();
  if (m < 2) throw DegenerateBatch(fmt::format("bn_forward: need at least 2 samples, got {}", m));
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw InvalidParameter(fmt::format("bn_forward: eps={} outside [0, 1]", eps));
  }
  const bool conditional = !labels.empty();
  if (conditional) {
    if (labels.size() != m) throw ShapeError("bn_forward: one label per column required");
    if (params.gamma_bank.cols() != d || params.beta_bank.cols() != d ||
        params.gamma_bank.rows() != params.beta_bank.rows()) {
      throw ShapeError("bn_forward: class banks must be n x d");
    }
  } else if (params.gamma.size() != d || params.beta.size() != d) {
    throw ShapeError("bn_forward: gamma and beta must have one entry per channel");
  }
  Mat out(d, m);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += x(k, i);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) ss += (x(k, i) - mean) * (x(k, i) - mean);
    const double var = (1.0 - eps) * (ss / static_cast<double>(m - 1)) + eps;
    const double inv_std = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < m; ++i) {
      double gamma = 0.0;
      double beta = 0.0;
      if (conditional) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= params.gamma_bank.rows()) {
          throw UnknownClass(fmt::format("bn_forward: label {} out of range", y));
        }
        gamma = params.gamma_bank(static_cast<std::size_t>(y), k);
        beta = params.beta_bank(static_cast<std::size_t>(y), k);
      } else {
        gamma = params.gamma[k];
        beta = params.beta[k];
      }
      out(k, i) = gamma * ((x(k, i) - mean) * inv_std) + beta;
    }
  }
  return out;
}

Mat color_forward(const Mat& x_hat, const ColoringParams& params) {
  LayerConfig cfg;
  cfg.d = x_hat.rows();
  cfg.norm = NormMode::none;
  cfg.cond = CondMode::unconditional;
  if (params.gamma.rows() == cfg.d && params.gamma.cols() == cfg.d) {
    cfg.color = ColorMode::full;
  } else if (params.gamma.rows() == 1 && params.gamma.cols() == cfg.d) {
    cfg.color = ColorMode::diagonal;
  } else {
    throw ShapeError(fmt::format("color_forward: gamma is {}x{} for {} channels",
                                 params.gamma.rows(), params.gamma.cols(), cfg.d));
  }
  if (params.beta.size() != cfg.d) {
    throw ShapeError(fmt::format("color_forward: beta has {} entries for {} channels",
                                 params.beta.size(), cfg.d));
  }
  return color_all(x_hat, {}, params, cfg);
}

Mat cond_color_forward(const Mat& x_hat, std::span<const int> labels,
                       const ColoringParams& params, const LayerConfig& cfg) {
  if (x_hat.rows() != cfg.d) {
    throw ShapeError(fmt::format("cond_color_forward: {} channels, config says {}",
                                 x_hat.rows(), cfg.d));
  }
  params.validate(cfg);
  return color_all(x_hat, labels, params, cfg);
}

Mat resolve_gamma(int y, const Mat& assoc, const Mat& dict) {
  if (y < 0 || static_cast<std::size_t>(y) >= assoc.rows()) {
    throw UnknownClass(fmt::format("resolve_gamma: class {} outside [0, {})", y, assoc.rows()));
  }
  if (assoc.cols() != dict.rows()) {
    throw ShapeError(fmt::format("resolve_gamma: A is {}x{} but D has {} rows",
                                 assoc.rows(), assoc.cols(), dict.rows()));
  }
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dict.cols()))));
  if (d * d != dict.cols()) {
    throw ShapeError(fmt::format("resolve_gamma: dictionary rows of width {} are not d*d",
                                 dict.cols()));
  }
  Mat gamma(d, d);
  auto g = gamma.values();
  const auto a = assoc.row(static_cast<std::size_t>(y));
  for (std::size_t j = 0; j < a.size(); ++j) {
    const auto dj = dict.row(j);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] += a[j] * dj[c];
  }
  return gamma;
}

LayerGrads coloring_backward(const Mat& y_bar, const ForwardCache& cache,
                             const ColoringParams& params) {
  const LayerConfig& cfg = cache.cfg;
  const Mat& x_hat = cache.x_hat;
  if (y_bar.rows() != x_hat.rows() || y_bar.cols() != x_hat.cols()) {
    throw ShapeError(fmt::format("coloring_backward: gradient is {}x{}, output was {}x{}",
                                 y_bar.rows(), y_bar.cols(), x_hat.rows(), x_hat.cols()));
  }
  LayerGrads g;
  if (cfg.color == ColorMode::none) {
    g.d_input = y_bar;
    return g;
  }
  params.validate(cfg);

  const std::size_t d = cfg.d;
  const std::size_t width = cfg.color_width();
  const bool full = cfg.color == ColorMode::full;
  const auto groups = columns_by_class(cache.labels, cfg, x_hat.cols());

  if (cfg.has_agnostic_term()) {
    g.d_gamma = Mat(params.gamma.rows(), params.gamma.cols());
    g.d_beta = Vec(d, 0.0);
  }
  if (cfg.conditional()) g.d_beta_bank = Mat(cfg.n_classes, d);
  if (cfg.class_bank()) g.d_gamma_bank = Mat(cfg.n_classes, width);
  if (cfg.soft_assign()) {
    g.d_assoc = Mat(params.assoc.rows(), params.assoc.cols());
    g.d_dict = Mat(params.dict.rows(), params.dict.cols());
  }
  g.d_input = Mat(d, x_hat.cols());

  for (std::size_t y = 0; y < groups.size(); ++y) {
    const auto& cols = groups[y];
    if (cols.empty()) continue;

    // Outer-product and bias sums over this class's columns.
    Vec outer(width, 0.0);
    Vec bias(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      const double* yb = y_bar.row(k).data();
      for (std::size_t i : cols) bias[k] += yb[i];
      if (full) {
        for (std::size_t j = 0; j < d; ++j) {
          const double* xr = x_hat.row(j).data();
          double acc = 0.0;
          for (std::size_t i : cols) acc += yb[i] * xr[i];
          outer[k * d + j] = acc;
        }
      } else {
        const double* xr = x_hat.row(k).data();
        double acc = 0.0;
        for (std::size_t i : cols) acc += yb[i] * xr[i];
        outer[k] = acc;
      }
    }

    if (cfg.has_agnostic_term()) {
      auto dg = g.d_gamma.values();
      for (std::size_t c = 0; c < width; ++c) dg[c] += outer[c];
      for (std::size_t k = 0; k < d; ++k) g.d_beta[k] += bias[k];
    }
    if (cfg.conditional()) {
      auto row = g.d_beta_bank.row(y);
      for (std::size_t k = 0; k < d; ++k) row[k] = bias[k];
    }
    if (cfg.class_bank()) {
      auto row = g.d_gamma_bank.row(y);
      std::copy(outer.begin(), outer.end(), row.begin());
    }
    if (cfg.soft_assign()) {
      const auto a = params.assoc.row(y);
      for (std::size_t j = 0; j < params.dict.rows(); ++j) {
        const auto dj = params.dict.row(j);
        double acc = 0.0;
        for (std::size_t c = 0; c < width; ++c) acc += outer[c] * dj[c];
        g.d_assoc(y, j) = acc;
        auto dd = g.d_dict.row(j);
        for (std::size_t c = 0; c < width; ++c) dd[c] += a[j] * outer[c];
      }
    }

    // Input sensitivity: Gamma_eff^T y_bar on this class's columns.
    const EffectiveColoring e = effective_coloring(params, cfg, y);
    for (std::size_t j = 0; j < d; ++j) {
      double* out_row = g.d_input.row(j).data();
      if (full) {
        for (std::size_t k = 0; k < d; ++k) {
          const double coef = e.gamma[k * d + j];
          const double* yb = y_bar.row(k).data();
          for (std::size_t i : cols) out_row[i] += coef * yb[i];
        }
      } else {
        const double coef = e.gamma[j];
        const double* yb = y_bar.row(j).data();
        for (std::size_t i : cols) out_row[i] += coef * yb[i];
      }
    }
  }
  return g;
}

}  // namespace wcnorm
