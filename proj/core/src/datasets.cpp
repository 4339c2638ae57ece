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

#include "wcnorm/datasets.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

constexpr double kSigma = 0.05;
constexpr std::size_t kMoonAnchors = 8;

constexpr std::array<std::string_view, 3> kNames = {"ring8", "grid25", "two_moons"};

struct Layout {
  Mat centers;
  std::vector<int> center_labels;
  std::size_t n_classes = 0;
};

Layout layout(std::string_view name) {
  Layout l;
  if (name == "ring8") {
    l.centers = Mat(2, 8);
    for (std::size_t k = 0; k < 8; ++k) {
      const double a = static_cast<double>(k) * std::numbers::pi / 4.0;
      l.centers(0, k) = std::cos(a);
      l.centers(1, k) = std::sin(a);
      l.center_labels.push_back(static_cast<int>(k));
    }
    l.n_classes = 8;
  } else if (name == "grid25") {
    l.centers = Mat(2, 25);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        const std::size_t k = 5 * i + j;
        l.centers(0, k) = 0.5 * (static_cast<double>(i) - 2.0);
        l.centers(1, k) = 0.5 * (static_cast<double>(j) - 2.0);
        l.center_labels.push_back(static_cast<int>(k));
      }
    }
    l.n_classes = 25;
  } else if (name == "two_moons") {
    l.centers = Mat(2, 2 * kMoonAnchors);
    for (std::size_t moon = 0; moon < 2; ++moon) {
      for (std::size_t a = 0; a < kMoonAnchors; ++a) {
        const double t =
            std::numbers::pi * static_cast<double>(a) / static_cast<double>(kMoonAnchors - 1);
        const std::size_t k = moon * kMoonAnchors + a;
        // Upper moon around (-0.5, -0.25), lower moon shifted and flipped.
        if (moon == 0) {
          l.centers(0, k) = std::cos(t) - 0.5;
          l.centers(1, k) = std::sin(t) - 0.25;
        } else {
          l.centers(0, k) = 0.5 - std::cos(t);
          l.centers(1, k) = 0.25 - std::sin(t);
        }
        l.center_labels.push_back(static_cast<int>(moon));
      }
    }
    l.n_classes = 2;
  } else {
    throw UnknownDataset(fmt::format("unknown dataset '{}'", name));
  }
  return l;
}

}  // namespace

std::span<const std::string_view> dataset_names() { return kNames; }

Dataset make_dataset(std::string_view name, std::size_t n, std::uint64_t seed) {
  Layout l = layout(name);
  Dataset ds;
  ds.sigma = kSigma;
  ds.n_classes = l.n_classes;
  ds.x = Mat(2, n);
  ds.labels.resize(n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, kSigma);
  const bool moons = name == "two_moons";
  std::uniform_int_distribution<std::size_t> pick(0, l.centers.cols() - 1);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::bernoulli_distribution which_moon(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    if (moons) {
      const int moon = which_moon(rng) ? 1 : 0;
      const double t = angle(rng);
      const double sign = moon == 0 ? 1.0 : -1.0;
      ds.x(0, i) = sign * (std::cos(t) - 0.5) + noise(rng);
      ds.x(1, i) = sign * (std::sin(t) - 0.25) + noise(rng);
      ds.labels[i] = moon;
    } else {
      const std::size_t k = pick(rng);
      ds.x(0, i) = l.centers(0, k) + noise(rng);
      ds.x(1, i) = l.centers(1, k) + noise(rng);
      ds.labels[i] = l.center_labels[k];
    }
  }
  ds.centers = std::move(l.centers);
  ds.center_labels = std::move(l.center_labels);
  return ds;
}

}  // namespace wcnorm
