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

// Whitening-and-coloring normalization layers.
//
// A layer is normalization followed by coloring:
//
//   x_hat = W_B (x - mu_B)                 (batch whitening)
//   y     = Gamma x_hat + beta             (unconditional coloring)
//   y     = (Gamma_y + Gamma) x_hat + beta_y + beta   (conditional coloring)
//
// where Gamma_y is either a per-class learned matrix or a mixture
// A_y D of dictionary rows. LayerConfig spans the whole grid of baselines:
// per-channel standardization instead of whitening, ZCA instead of Cholesky
// whitening, diagonal instead of full coloring, and with or without the
// class-agnostic term.

#ifndef WCNORM_WCLAYERS_HPP_
#define WCNORM_WCLAYERS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wcnorm/linalg.hpp"
#include "wcnorm/normstats.hpp"

namespace wcnorm {

enum class NormMode { none, standardize, whiten_cholesky, whiten_zca };
enum class ColorMode { none, diagonal, full };
enum class CondMode {
  unconditional,
  class_bank,
  class_bank_plus_agnostic,
  soft_assign,
  soft_assign_plus_agnostic,
};
enum class ForwardMode { train, infer };

std::string_view to_string(NormMode mode);
std::string_view to_string(ColorMode mode);
std::string_view to_string(CondMode mode);
// Throw InvalidParameter on an unknown name.
NormMode parse_norm_mode(std::string_view name);
ColorMode parse_color_mode(std::string_view name);
CondMode parse_cond_mode(std::string_view name);

struct LayerConfig {
  NormMode norm = NormMode::whiten_cholesky;
  ColorMode color = ColorMode::full;
  CondMode cond = CondMode::unconditional;
  std::size_t d = 0;
  std::size_t n_classes = 0;
  std::size_t dict_size = 0;  // s; 0 selects ceil(sqrt(n_classes))
  double eps = kDefaultShrinkage;
  double momentum = kDefaultMomentum;

  // Builds one of the named baselines, e.g. "WC", "cWC_sa", "W-only".
  // Throws InvalidParameter for an unknown name.
  static LayerConfig named(std::string_view variant, std::size_t d,
                           std::size_t n_classes = 0, std::size_t dict_size = 0);

  void validate() const;  // throws InvalidParameter

  bool conditional() const noexcept { return cond != CondMode::unconditional; }
  bool soft_assign() const noexcept {
    return cond == CondMode::soft_assign || cond == CondMode::soft_assign_plus_agnostic;
  }
  bool class_bank() const noexcept {
    return cond == CondMode::class_bank || cond == CondMode::class_bank_plus_agnostic;
  }
  bool has_agnostic_term() const noexcept {
    return color != ColorMode::none &&
           (cond == CondMode::unconditional || cond == CondMode::class_bank_plus_agnostic ||
            cond == CondMode::soft_assign_plus_agnostic);
  }
  // Number of stored coefficients per coloring matrix: d*d or d.
  std::size_t color_width() const noexcept {
    return color == ColorMode::full ? d * d : d;
  }
  std::size_t effective_dict_size() const noexcept;

  bool operator==(const LayerConfig&) const = default;
};

// The variants certified by the gradient checker, in report order.
std::span<const std::string_view> gradcheck_variants();
// Every named variant accepted by LayerConfig::named.
std::span<const std::string_view> all_variants();
// Name of the variant cfg corresponds to, if any.
std::optional<std::string_view> variant_name(const LayerConfig& cfg);

template <typename T>
struct BasicParamGroup {
  std::string_view name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<T> values;
};
using ParamGroup = BasicParamGroup<double>;
using ConstParamGroup = BasicParamGroup<const double>;

// Learnable coloring parameters. Diagonal coloring stores gamma as 1 x d and
// bank/dictionary rows of width d; full coloring stores d x d and rows of
// width d*d (row-major flattening, so row k of Gamma is the k-th filter).
// Groups not used by the configuration are empty.
struct ColoringParams {
  Mat gamma;
  Vec beta;
  Mat gamma_bank;  // n x color_width
  Mat beta_bank;   // n x d
  Mat assoc;       // n x s
  Mat dict;        // s x color_width

  // Non-empty groups in the fixed order gamma, beta, gamma_bank, beta_bank,
  // assoc, dict.
  std::vector<ParamGroup> groups();
  std::vector<ConstParamGroup> groups() const;
  // Throws ShapeError unless exactly the groups cfg needs are present with
  // the right shapes.
  void validate(const LayerConfig& cfg) const;

  bool operator==(const ColoringParams&) const = default;
};

// Per-channel batch normalization parameters; the banks (n x d) select
// class-specific scale and shift when labels are supplied.
struct BNParams {
  Vec gamma;
  Vec beta;
  Mat gamma_bank;
  Mat beta_bank;
};

struct LayerGrads {
  Mat d_gamma;
  Vec d_beta;
  Mat d_gamma_bank;
  Mat d_beta_bank;
  Mat d_assoc;
  Mat d_dict;
  Mat d_input;

  // Same names and order as ColoringParams::groups().
  std::vector<ConstParamGroup> groups() const;
};

// State retained by a forward pass for its backward pass.
struct ForwardCache {
  LayerConfig cfg;
  ForwardMode mode = ForwardMode::train;
  Mat x_centered;  // X in d x m, mean removed
  Vec mu;
  Mat sigma;       // shrunk batch covariance (whitening modes)
  std::optional<LowerTriangular> chol;
  EigenDecomposition eig;  // ZCA mode
  Mat w;           // whitening matrix actually applied
  Vec inv_std;     // standardize mode
  Mat x_hat;
  std::vector<int> labels;
  bool consumed = false;
};

struct LayerOutput {
  Mat y;
  ForwardCache cache;
};

// gamma_k (x_k - mu_k) / sqrt(v_k) + beta_k with v_k the shrunk unbiased
// variance (1 - eps) s_k^2 + eps. With labels and banks, the class-specific
// gamma_y and beta_y replace gamma and beta. Throws DegenerateBatch if m < 2.
Mat bn_forward(const Mat& x, const BNParams& params, double eps,
               std::span<const int> labels = {});

// Gamma x_hat + beta 1^T. Throws ShapeError.
Mat color_forward(const Mat& x_hat, const ColoringParams& params);

// Per column i with label y: (Gamma_y [+ Gamma]) x_hat_i + beta_y [+ beta].
// Throws UnknownClass for a label outside [0, n).
Mat cond_color_forward(const Mat& x_hat, std::span<const int> labels,
                       const ColoringParams& params, const LayerConfig& cfg);

// Gamma_y = reshape(A_y D) as a d x d matrix.
Mat resolve_gamma(int y, const Mat& assoc, const Mat& dict);

// Normalization then coloring. In train mode uses batch statistics and
// folds them into `running`; in infer mode uses the frozen running
// statistics (NotFrozen otherwise).
LayerOutput wc_forward(const Mat& x_raw, std::span<const int> labels,
                       const ColoringParams& params, const LayerConfig& cfg,
                       ForwardMode mode, RunningStats& running);

// Reverse-mode sensitivity of the Cholesky whitening step: given the
// gradient with respect to x_hat, returns the gradient with respect to the
// raw (uncentered) input.
Mat whitening_backward(const Mat& y_bar, const ForwardCache& cache);

// Dispatches on the cached normalization mode.
Mat normalization_backward(const Mat& x_hat_bar, const ForwardCache& cache);

// Parameter gradients of the coloring step. `d_input` holds the gradient
// with respect to x_hat.
LayerGrads coloring_backward(const Mat& y_bar, const ForwardCache& cache,
                             const ColoringParams& params);

// Full layer backward; marks the cache consumed (CacheMismatch on reuse).
LayerGrads wc_backward(const Mat& y_bar, ForwardCache& cache, const ColoringParams& params);

// Gamma = I, beta = 0, banks zero (identity when there is no class-agnostic
// term), A rows uniform 1/s, D ~ N(0, 0.01^2).
ColoringParams init_params(const LayerConfig& cfg, std::uint64_t seed);

// Stateful wrapper: parameters, running statistics and the last cache.
class WCLayer {
 public:
  WCLayer(LayerConfig cfg, std::uint64_t seed);
  WCLayer(LayerConfig cfg, ColoringParams params);

  const LayerConfig& config() const noexcept { return cfg_; }
  ColoringParams& params() noexcept { return params_; }
  const ColoringParams& params() const noexcept { return params_; }
  RunningStats& running() noexcept { return running_; }
  const RunningStats& running() const noexcept { return running_; }

  Mat forward(const Mat& x, std::span<const int> labels, ForwardMode mode);
  LayerGrads backward(const Mat& y_bar);

  // Freezes the running statistics with the layer's own whitening method.
  void freeze();
  WhiteningMethod whitening_method() const noexcept;

  // Cache of the most recent forward pass, if any.
  const ForwardCache* last_cache() const noexcept {
    return cache_ ? &*cache_ : nullptr;
  }

 private:
  LayerConfig cfg_;
  ColoringParams params_;
  RunningStats running_;
  std::optional<ForwardCache> cache_;
};

}  // namespace wcnorm

#endif  // WCNORM_WCLAYERS_HPP_
