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

// Two-class dense classifier with a normalization layer after the first
// affine map only, for comparing per-channel standardization against full
// whitening and coloring.

#ifndef WCNORM_CLASSIFIER_HPP_
#define WCNORM_CLASSIFIER_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wcnorm/linalg.hpp"

namespace wcnorm {

enum class ClassifierTask {
  separable,   // well separated isotropic classes
  correlated,  // strongly correlated features, classes split along a low-variance direction
};

struct ClassifierConfig {
  ClassifierTask task = ClassifierTask::correlated;
  std::size_t input_dim = 8;
  std::size_t hidden = 16;
  std::size_t n_train = 4096;
  std::size_t n_test = 4096;
  std::size_t steps = 400;
  std::size_t batch_size = 256;
  double lr = 5e-3;
  // Train-mode passes with frozen weights before freezing the statistics.
  std::size_t recalibration_batches = 100;
  std::size_t n_seeds = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> variants = {"BN", "WC"};
};

struct ClassifierRow {
  std::string variant;
  std::vector<double> accuracies;  // one per seed
  double mean = 0.0;
  double sd = 0.0;                 // sample standard deviation
};

struct ClassifierData {
  Mat x;                  // input_dim x n
  std::vector<int> labels;  // 0 or 1, balanced
};

ClassifierData make_classifier_data(ClassifierTask task, std::size_t input_dim, std::size_t n,
                                    std::uint64_t seed);

// One row per variant; the last layer starts at zero so untrained models
// score chance on the balanced test set.
std::vector<ClassifierRow> classifier_experiment(const ClassifierConfig& cfg);

}  // namespace wcnorm

#endif  // WCNORM_CLASSIFIER_HPP_
