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

// Central finite differences as an independent oracle for the analytic
// layer gradients.

#ifndef WCNORM_GRADCHECK_HPP_
#define WCNORM_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

#include "wcnorm/linalg.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {

inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr double kDefaultGradTolerance = 1e-5;

using ScalarFn = std::function<double(std::span<const double>)>;

// (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate i.
// Throws InvalidParameter for h <= 0 and NonFiniteLoss if f is not finite.
Vec finite_difference(const ScalarFn& loss, std::span<const double> point,
                      double step = kDefaultFdStep);

// |a - b| / max(|a|, |b|, 1e-8); infinity when either side is NaN.
double relative_error(double a, double b) noexcept;

struct GradcheckShape {
  std::size_t d = 4;
  std::size_t m = 16;
  std::size_t n_classes = 5;
  std::size_t dict_size = 0;  // 0 keeps the layer default
};

struct GradReport {
  std::string variant;
  double max_rel_error = 0.0;
  std::string worst_group;      // "input" or a parameter group name
  std::size_t worst_index = 0;  // flat index inside worst_group
  std::map<std::string, double> group_errors;
  double tolerance = kDefaultGradTolerance;
  bool passed = false;
};

// Random layer, batch and linear probe R; compares the analytic gradients of
// sum(R o Y) against finite differences for the input and every parameter
// group. `cfg.d` is used as is; labels cover every class when m >= n.
GradReport check_layer(const LayerConfig& cfg, std::uint64_t seed,
                       double tolerance = kDefaultGradTolerance,
                       std::size_t m = 16, double step = kDefaultFdStep);

// Named variant with the given shape.
GradReport check_variant(std::string_view variant, const GradcheckShape& shape,
                         std::uint64_t seed, double tolerance = kDefaultGradTolerance);

}  // namespace wcnorm

#endif  // WCNORM_GRADCHECK_HPP_
