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

#include <array>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {
namespace {

struct VariantSpec {
  std::string_view name;
  NormMode norm;
  ColorMode color;
  CondMode cond;
};

constexpr std::array kVariants = {
    VariantSpec{"BN", NormMode::standardize, ColorMode::diagonal, CondMode::unconditional},
    VariantSpec{"W-only", NormMode::whiten_cholesky, ColorMode::none, CondMode::unconditional},
    VariantSpec{"WC-diag", NormMode::whiten_cholesky, ColorMode::diagonal, CondMode::unconditional},
    VariantSpec{"std-C", NormMode::standardize, ColorMode::full, CondMode::unconditional},
    VariantSpec{"C-only", NormMode::none, ColorMode::full, CondMode::unconditional},
    VariantSpec{"WC", NormMode::whiten_cholesky, ColorMode::full, CondMode::unconditional},
    VariantSpec{"W_zcaC", NormMode::whiten_zca, ColorMode::full, CondMode::unconditional},
    VariantSpec{"cBN", NormMode::standardize, ColorMode::diagonal, CondMode::class_bank},
    VariantSpec{"cWC-cls-only", NormMode::whiten_cholesky, ColorMode::full, CondMode::class_bank},
    VariantSpec{"cWC_sa-cls-only", NormMode::whiten_cholesky, ColorMode::full,
                CondMode::soft_assign},
    VariantSpec{"cWC-diag", NormMode::whiten_cholesky, ColorMode::diagonal,
                CondMode::class_bank_plus_agnostic},
    VariantSpec{"c-std-C", NormMode::standardize, ColorMode::full,
                CondMode::class_bank_plus_agnostic},
    VariantSpec{"cWC", NormMode::whiten_cholesky, ColorMode::full,
                CondMode::class_bank_plus_agnostic},
    VariantSpec{"cWC_sa", NormMode::whiten_cholesky, ColorMode::full,
                CondMode::soft_assign_plus_agnostic},
};

constexpr std::array<std::string_view, kVariants.size()> kAllNames = [] {
  std::array<std::string_view, kVariants.size()> names{};
  for (std::size_t i = 0; i < kVariants.size(); ++i) names[i] = kVariants[i].name;
  return names;
}();

constexpr std::array<std::string_view, 12> kGradcheckNames = {
    "W-only", "WC-diag", "std-C", "C-only", "WC", "cBN",
    "cWC-cls-only", "cWC_sa-cls-only", "cWC-diag", "c-std-C", "cWC", "cWC_sa",
};

template <typename Group, typename Self>
std::vector<Group> collect_groups(Self& p) {
  std::vector<Group> out;
  auto add = [&](std::string_view name, std::size_t rows, std::size_t cols, auto values) {
    if (!values.empty()) out.push_back(Group{name, rows, cols, values});
  };
  add("gamma", p.gamma.rows(), p.gamma.cols(), p.gamma.values());
  add("beta", std::size_t{1}, p.beta.size(), std::span(p.beta));
  add("gamma_bank", p.gamma_bank.rows(), p.gamma_bank.cols(), p.gamma_bank.values());
  add("beta_bank", p.beta_bank.rows(), p.beta_bank.cols(), p.beta_bank.values());
  add("assoc", p.assoc.rows(), p.assoc.cols(), p.assoc.values());
  add("dict", p.dict.rows(), p.dict.cols(), p.dict.values());
  return out;
}

void expect_shape(const char* name, std::size_t rows, std::size_t cols,
                  std::size_t want_rows, std::size_t want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw ShapeError(fmt::format("coloring parameter '{}' is {}x{}, expected {}x{}", name,
                                 rows, cols, want_rows, want_cols));
  }
}

}  // namespace

std::string_view to_string(NormMode mode) {
  switch (mode) {
    case NormMode::none: return "none";
    case NormMode::standardize: return "standardize";
    case NormMode::whiten_cholesky: return "whiten_cholesky";
    case NormMode::whiten_zca: return "whiten_zca";
  }
  return "?";
}

std::string_view to_string(ColorMode mode) {
  switch (mode) {
    case ColorMode::none: return "none";
    case ColorMode::diagonal: return "diagonal";
    case ColorMode::full: return "full";
  }
  return "?";
}

std::string_view to_string(CondMode mode) {
  switch (mode) {
    case CondMode::unconditional: return "unconditional";
    case CondMode::class_bank: return "class_bank";
    case CondMode::class_bank_plus_agnostic: return "class_bank_plus_agnostic";
    case CondMode::soft_assign: return "soft_assign";
    case CondMode::soft_assign_plus_agnostic: return "soft_assign_plus_agnostic";
  }
  return "?";
}

NormMode parse_norm_mode(std::string_view name) {
  for (auto m : {NormMode::none, NormMode::standardize, NormMode::whiten_cholesky,
                 NormMode::whiten_zca}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidParameter(fmt::format("unknown normalization mode '{}'", name));
}

ColorMode parse_color_mode(std::string_view name) {
  for (auto m : {ColorMode::none, ColorMode::diagonal, ColorMode::full}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidParameter(fmt::format("unknown coloring mode '{}'", name));
}

CondMode parse_cond_mode(std::string_view name) {
  for (auto m : {CondMode::unconditional, CondMode::class_bank,
                 CondMode::class_bank_plus_agnostic, CondMode::soft_assign,
                 CondMode::soft_assign_plus_agnostic}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidParameter(fmt::format("unknown conditioning mode '{}'", name));
}

std::size_t LayerConfig::effective_dict_size() const noexcept {
  if (dict_size > 0) return dict_size;
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_classes))));
}

LayerConfig LayerConfig::named(std::string_view variant, std::size_t d,
                               std::size_t n_classes, std::size_t dict_size) {
  for (const auto& v : kVariants) {
    if (v.name != variant) continue;
    LayerConfig cfg;
    cfg.norm = v.norm;
    cfg.color = v.color;
    cfg.cond = v.cond;
    cfg.d = d;
    if (cfg.conditional()) {
      cfg.n_classes = n_classes;
      cfg.dict_size = cfg.soft_assign() ? dict_size : 0;
    }
    return cfg;
  }
  throw InvalidParameter(fmt::format("unknown layer variant '{}'", variant));
}

void LayerConfig::validate() const {
  if (d == 0) throw InvalidParameter("layer config: d must be at least 1");
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw InvalidParameter(fmt::format("layer config: eps={} outside [0, 1]", eps));
  }
  if (!(momentum > 0.0 && momentum <= 1.0)) {
    throw InvalidParameter(fmt::format("layer config: lambda={} outside (0, 1]", momentum));
  }
  if (!conditional()) return;
  if (n_classes < 2) {
    throw InvalidParameter(fmt::format(
        "layer config: conditional mode {} needs at least 2 classes, got {}",
        to_string(cond), n_classes));
  }
  if (color == ColorMode::none) {
    throw InvalidParameter("layer config: conditional modes need coloring");
  }
  if (soft_assign()) {
    if (color != ColorMode::full) {
      throw InvalidParameter("layer config: soft assignment needs full coloring");
    }
    if (effective_dict_size() < 1) {
      throw InvalidParameter("layer config: dictionary size must be at least 1");
    }
  }
}

std::span<const std::string_view> gradcheck_variants() { return kGradcheckNames; }

std::span<const std::string_view> all_variants() { return kAllNames; }

std::optional<std::string_view> variant_name(const LayerConfig& cfg) {
  for (const auto& v : kVariants) {
    if (v.norm == cfg.norm && v.color == cfg.color && v.cond == cfg.cond) return v.name;
  }
  return std::nullopt;
}

std::vector<ParamGroup> ColoringParams::groups() {
  return collect_groups<ParamGroup>(*this);
}

std::vector<ConstParamGroup> ColoringParams::groups() const {
  return collect_groups<ConstParamGroup>(*this);
}

std::vector<ConstParamGroup> LayerGrads::groups() const {
  struct View {
    const Mat& gamma;
    const Vec& beta;
    const Mat& gamma_bank;
    const Mat& beta_bank;
    const Mat& assoc;
    const Mat& dict;
  } view{d_gamma, d_beta, d_gamma_bank, d_beta_bank, d_assoc, d_dict};
  return collect_groups<ConstParamGroup>(view);
}

void ColoringParams::validate(const LayerConfig& cfg) const {
  const std::size_t d = cfg.d;
  const std::size_t width = cfg.color_width();
  if (cfg.has_agnostic_term()) {
    if (cfg.color == ColorMode::full) {
      expect_shape("gamma", gamma.rows(), gamma.cols(), d, d);
    } else {
      expect_shape("gamma", gamma.rows(), gamma.cols(), 1, d);
    }
    expect_shape("beta", 1, beta.size(), 1, d);
  } else {
    expect_shape("gamma", gamma.rows(), gamma.cols(), 0, 0);
    expect_shape("beta", 1, beta.size(), 1, 0);
  }
  const std::size_t n = cfg.conditional() ? cfg.n_classes : 0;
  if (cfg.class_bank()) {
    expect_shape("gamma_bank", gamma_bank.rows(), gamma_bank.cols(), n, width);
  } else {
    expect_shape("gamma_bank", gamma_bank.rows(), gamma_bank.cols(), 0, 0);
  }
  if (cfg.conditional()) {
    expect_shape("beta_bank", beta_bank.rows(), beta_bank.cols(), n, d);
  } else {
    expect_shape("beta_bank", beta_bank.rows(), beta_bank.cols(), 0, 0);
  }
  if (cfg.soft_assign()) {
    const std::size_t s = cfg.effective_dict_size();
    expect_shape("assoc", assoc.rows(), assoc.cols(), n, s);
    expect_shape("dict", dict.rows(), dict.cols(), s, width);
  } else {
    expect_shape("assoc", assoc.rows(), assoc.cols(), 0, 0);
    expect_shape("dict", dict.rows(), dict.cols(), 0, 0);
  }
}

ColoringParams init_params(const LayerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ColoringParams p;
  const std::size_t d = cfg.d;
  const std::size_t width = cfg.color_width();
  const bool full = cfg.color == ColorMode::full;

  // Flattened identity coloring in the layout of a bank or dictionary row.
  Vec identity_row(width, 0.0);
  for (std::size_t k = 0; k < d; ++k) identity_row[full ? k * d + k : k] = 1.0;

  if (cfg.has_agnostic_term()) {
    p.gamma = full ? Mat::identity(d) : Mat(1, d, 1.0);
    p.beta = Vec(d, 0.0);
  }
  if (!cfg.conditional()) return p;

  const std::size_t n = cfg.n_classes;
  p.beta_bank = Mat(n, d);
  if (cfg.class_bank()) {
    p.gamma_bank = Mat(n, width);
    // Without a class-agnostic term the class matrices carry the whole
    // coloring; start them at the identity instead of at zero.
    if (!cfg.has_agnostic_term()) {
      for (std::size_t y = 0; y < n; ++y) {
        std::copy(identity_row.begin(), identity_row.end(), p.gamma_bank.row(y).begin());
      }
    }
  }
  if (cfg.soft_assign()) {
    const std::size_t s = cfg.effective_dict_size();
    p.assoc = Mat(n, s, 1.0 / static_cast<double>(s));
    p.dict = Mat(s, width);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (std::size_t j = 0; j < s; ++j) {
      auto row = p.dict.row(j);
      for (std::size_t c = 0; c < width; ++c) {
        row[c] = noise(rng) + (cfg.has_agnostic_term() ? 0.0 : identity_row[c]);
      }
    }
  }
  return p;
}

}  // namespace wcnorm
