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

// Synthetic 2-D mixtures used as stand-ins for image datasets.

#ifndef WCNORM_DATASETS_HPP_
#define WCNORM_DATASETS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wcnorm/linalg.hpp"

namespace wcnorm {

struct Dataset {
  Mat x;                    // 2 x n samples
  std::vector<int> labels;  // class of each sample
  Mat centers;              // 2 x n_modes
  std::vector<int> center_labels;
  std::size_t n_classes = 0;
  double sigma = 0.0;       // per-coordinate noise
};

// ring8: 8 Gaussians, sigma 0.05, on the unit circle at angles k * 45 deg.
// grid25: 5 x 5 Gaussians, sigma 0.05, spacing 0.5, centered at the origin.
// two_moons: two interleaved half circles with sigma 0.05 noise; the centers
// are 8 anchor points per moon and the label is the moon.
// Throws UnknownDataset.
Dataset make_dataset(std::string_view name, std::size_t n, std::uint64_t seed);

std::span<const std::string_view> dataset_names();

}  // namespace wcnorm

#endif  // WCNORM_DATASETS_HPP_
