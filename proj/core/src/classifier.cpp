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

#include "wcnorm/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "wcnorm/adam.hpp"
#include "wcnorm/dense_net.hpp"
#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

double accuracy(DenseNet& net, const ClassifierData& data) {
  const Mat logits = net.forward(data.x, {}, ForwardMode::infer);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    const int predicted = logits(0, i) > 0.0 ? 1 : 0;
    if (predicted == data.labels[i]) ++correct;
  }
  return data.labels.empty() ? 0.0
                             : static_cast<double>(correct) /
                                   static_cast<double>(data.labels.size());
}

}  // namespace

ClassifierData make_classifier_data(ClassifierTask task, std::size_t input_dim, std::size_t n,
                                    std::uint64_t seed) {
  if (input_dim < 2) throw InvalidParameter("classifier data: input_dim must be at least 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ClassifierData data;
  data.x = Mat(input_dim, n);
  data.labels.resize(n);
  const double dim = static_cast<double>(input_dim);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    const double sign = y == 1 ? 1.0 : -1.0;
    data.labels[i] = y;
    if (task == ClassifierTask::separable) {
      for (std::size_t k = 0; k < input_dim; ++k) {
        data.x(k, i) = sign * 2.0 / std::sqrt(dim) + 0.3 * normal(rng);
      }
    } else {
      // A shared factor with large variance dominates every feature; the
      // class signal lives in the contrast between the first two features,
      // with per-feature scales spread over two orders of magnitude.
      const double shared = 3.0 * normal(rng);
      for (std::size_t k = 0; k < input_dim; ++k) {
        const double scale = std::pow(10.0, 2.0 * static_cast<double>(k) / (dim - 1.0) - 1.0);
        double v = shared + 0.3 * normal(rng);
        if (k == 0) v += 0.4 * sign;
        if (k == 1) v -= 0.4 * sign;
        data.x(k, i) = scale * v;
      }
    }
  }
  return data;
}

std::vector<ClassifierRow> classifier_experiment(const ClassifierConfig& cfg) {
  if (cfg.n_seeds == 0 || cfg.batch_size < 2 || cfg.hidden == 0) {
    throw InvalidParameter("classifier config: n_seeds, hidden and batch_size >= 2 required");
  }
  std::vector<ClassifierRow> rows;
  for (const std::string& variant : cfg.variants) {
    ClassifierRow row;
    row.variant = variant;
    for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
      const std::uint64_t seed = cfg.seed + 1000 * s;
      const ClassifierData train =
          make_classifier_data(cfg.task, cfg.input_dim, cfg.n_train, seed + 1);
      const ClassifierData test =
          make_classifier_data(cfg.task, cfg.input_dim, cfg.n_test, seed + 2);
      const LayerConfig norm = LayerConfig::named(variant, cfg.hidden);
      DenseNet net({{cfg.input_dim, cfg.hidden, Activation::relu, norm, false, false},
                    {cfg.hidden, 1, Activation::linear, std::nullopt, false, true}},
                   seed + 3);
      const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
      std::mt19937_64 rng(seed + 4);
      std::uniform_int_distribution<std::size_t> pick(0, cfg.n_train - 1);
      const std::size_t b = cfg.batch_size;
      Mat x(cfg.input_dim, b);
      std::vector<int> y(b);
      for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (std::size_t i = 0; i < b; ++i) {
          const std::size_t j = pick(rng);
          for (std::size_t k = 0; k < cfg.input_dim; ++k) x(k, i) = train.x(k, j);
          y[i] = train.labels[j];
        }
        const Mat logits = net.forward(x, {}, ForwardMode::train);
        // Logistic loss log(1 + exp(-t s)) with t = +-1.
        Mat g(1, b);
        for (std::size_t i = 0; i < b; ++i) {
          const double t = y[i] == 1 ? 1.0 : -1.0;
          g(0, i) = -t / (1.0 + std::exp(t * logits(0, i))) / static_cast<double>(b);
        }
        net.backward(g);
        net.adam_step(adam);
      }
      // Re-estimate running statistics with the final weights. Whitening
      // amplifies near-null directions of the covariance, so statistics
      // gathered while the weights moved do not match the trained network.
      const std::size_t recal = std::max<std::size_t>(cfg.recalibration_batches, 1);
      for (std::size_t r = 0; r < recal; ++r) {
        for (std::size_t i = 0; i < b; ++i) {
          const std::size_t j = pick(rng);
          for (std::size_t k = 0; k < cfg.input_dim; ++k) x(k, i) = train.x(k, j);
        }
        (void)net.forward(x, {}, ForwardMode::train);
      }
      net.freeze();
      row.accuracies.push_back(accuracy(net, test));
    }
    const double n = static_cast<double>(row.accuracies.size());
    row.mean = std::accumulate(row.accuracies.begin(), row.accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : row.accuracies) ss += (a - row.mean) * (a - row.mean);
    row.sd = row.accuracies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wcnorm
