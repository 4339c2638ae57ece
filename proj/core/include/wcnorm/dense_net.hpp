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

// Small fully connected networks with hand-written backward passes. Each
// layer is affine map, optional normalization layer, activation. Samples are
// columns, as in the normalization layers.

#ifndef WCNORM_DENSE_NET_HPP_
#define WCNORM_DENSE_NET_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcnorm/adam.hpp"
#include "wcnorm/checkpoint.hpp"
#include "wcnorm/linalg.hpp"
#include "wcnorm/spectral_norm.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {

enum class Activation { linear, relu, tanh };

struct DenseLayerSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::linear;
  std::optional<LayerConfig> norm;  // norm->d must equal out
  bool spectral = false;
  bool zero_init = false;  // start with W = 0 (incompatible with spectral)
  std::size_t power_iterations = 1;  // per updating forward pass
};

struct DenseLayer {
  Mat w;
  Vec b;
  Activation act = Activation::linear;
  std::optional<WCLayer> norm;
  bool spectral = false;
  std::size_t power_iterations = 1;
  SpectralState sn;

  // Gradients from the last backward pass.
  Mat dw;
  Vec db;
  std::optional<LayerGrads> dnorm;

  AdamState adam_w;
  AdamState adam_b;
  std::vector<AdamState> adam_norm;  // one per coloring parameter group

  // Forward cache.
  Mat x_in;
  Mat w_eff;  // W or W / sigma(W)
  Mat out;    // post-activation
};

class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(const std::vector<DenseLayerSpec>& specs, std::uint64_t seed);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  // `update_spectral` runs each spectrally normalized layer's power
  // iterations; otherwise the stored singular vectors are reused.
  Mat forward(const Mat& x, std::span<const int> labels, ForwardMode mode,
              bool update_spectral = false);
  // Stores parameter gradients in the layers and returns the input gradient.
  Mat backward(const Mat& out_bar);
  void adam_step(const AdamConfig& cfg);
  // Freezes every normalization layer.
  void freeze();

  // Normalized output x_hat of the first normalization layer in the last
  // forward pass, if any.
  const Mat* first_normalized() const;

  void save(Checkpoint& ckpt, const std::string& prefix) const;
  // Restores into a network of identical architecture; CheckpointError on
  // any shape mismatch.
  void load(const Checkpoint& ckpt, const std::string& prefix);

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace wcnorm

#endif  // WCNORM_DENSE_NET_HPP_
