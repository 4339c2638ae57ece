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

// Adversarial training on 2-D mixtures: dense generator with normalization
// layers, spectrally normalized dense discriminator, hinge loss, Adam.

#ifndef WCNORM_GAN_TRAINER_HPP_
#define WCNORM_GAN_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcnorm/checkpoint.hpp"
#include "wcnorm/dense_net.hpp"
#include "wcnorm/linalg.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {

struct TrainConfig {
  std::string dataset = "ring8";
  // Generator normalization. `d` and `n_classes` are filled in from the
  // generator width and the dataset.
  LayerConfig layer = LayerConfig::named("WC", 0);
  std::size_t latent_dim = 64;
  std::size_t gen_width = 16;
  std::size_t gen_hidden_layers = 2;
  std::size_t disc_width = 32;
  std::size_t disc_hidden_layers = 2;
  std::size_t n_iters = 3000;
  std::size_t batch_size = 256;       // generator step
  std::size_t disc_batch_size = 128;  // real and fake samples each per critic step
  double lr_gen = 3e-3;
  double lr_disc = 3e-3;
  bool lr_decay = true;  // linear decay to zero over n_iters
  double beta1 = 0.0;
  double beta2 = 0.9;
  std::size_t disc_steps = 5;
  bool spectral_norm = true;
  std::size_t power_iterations = 20;  // per discriminator forward pass
  double output_scale = 1.25;  // generator output is output_scale * tanh(.)
  std::size_t log_every = 100;
  std::size_t eval_samples = 2048;
  std::size_t dataset_size = 20000;
  std::uint64_t seed = 0;
  bool log_wallclock = false;

  void validate() const;  // throws InvalidParameter
};

struct MetricsRecord {
  std::size_t iter = 0;
  double gen_loss = 0.0;
  double disc_loss = 0.0;
  std::size_t modes_covered = 0;
  double hq_fraction = 0.0;
  double whitened_cov_dev = 0.0;
  double wallclock_ms = 0.0;

  bool operator==(const MetricsRecord&) const = default;
};

enum class RunOutcome { completed, degenerated };
std::string_view to_string(RunOutcome outcome);

struct TrainResult {
  std::vector<MetricsRecord> metrics;
  Checkpoint checkpoint;  // last good state
  RunOutcome outcome = RunOutcome::completed;
  std::optional<std::size_t> degenerated_at;
  std::string degeneration_reason;
  std::size_t n_modes = 0;
  std::vector<double> max_disc_spectral_norm;  // per logged iteration
};

struct HingeLosses {
  double disc = 0.0;
  double gen = 0.0;
};

// disc = mean(max(0, 1 - d_real)) + mean(max(0, 1 + d_fake)),
// gen = -mean(d_fake).
HingeLosses hinge_losses(std::span<const double> d_real, std::span<const double> d_fake);

struct Coverage {
  std::size_t modes_covered = 0;
  double hq_fraction = 0.0;
};

// A sample counts for its nearest center when within `radius` of it. A mode
// is covered when it receives at least k / (4 n_modes) of the k samples.
// With k = 0 nothing is covered. Throws InvalidParameter for radius <= 0.
Coverage mode_coverage(const Mat& samples, const Mat& centers, double radius);

// max |Cov(x_hat) - I| over the normalized activations (d x m).
double whitened_cov_deviation(const Mat& x_hat);

// Deterministic given the config. A non-finite loss or a numerical error
// inside the networks ends the run as degenerated with the state of the
// last logged iteration.
TrainResult train(const TrainConfig& cfg);

// Networks as built by train(), exposed for tests.
DenseNet make_generator(const TrainConfig& cfg, const LayerConfig& layer, std::uint64_t seed);
DenseNet make_discriminator(const TrainConfig& cfg, std::size_t label_dim, std::uint64_t seed);

}  // namespace wcnorm

#endif  // WCNORM_GAN_TRAINER_HPP_
