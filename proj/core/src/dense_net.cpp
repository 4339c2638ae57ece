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

#include "wcnorm/dense_net.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

void apply_activation(Activation act, Mat& z) {
  switch (act) {
    case Activation::linear:
      return;
    case Activation::relu:
      for (double& v : z.values()) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::tanh:
      for (double& v : z.values()) v = std::tanh(v);
      return;
  }
}

// Gradient through the activation, given its output.
void activation_backward(Activation act, const Mat& out, Mat& g) {
  auto gv = g.values();
  const auto ov = out.values();
  switch (act) {
    case Activation::linear:
      return;
    case Activation::relu:
      for (std::size_t i = 0; i < gv.size(); ++i) {
        if (!(ov[i] > 0.0)) gv[i] = 0.0;
      }
      return;
    case Activation::tanh:
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= 1.0 - ov[i] * ov[i];
      return;
  }
}

void save_adam(Checkpoint& ckpt, const std::string& name, const AdamState& st) {
  if (st.t == 0) return;
  ckpt.put(name + ".m", st.m);
  ckpt.put(name + ".v", st.v);
  ckpt.put_scalar(name + ".t", static_cast<double>(st.t));
}

AdamState load_adam(const Checkpoint& ckpt, const std::string& name, std::size_t size) {
  AdamState st;
  if (!ckpt.contains(name + ".t")) return st;
  st.m = ckpt.get_vec(name + ".m", size);
  st.v = ckpt.get_vec(name + ".v", size);
  st.t = static_cast<std::uint64_t>(ckpt.get_scalar(name + ".t"));
  return st;
}

}  // namespace

DenseNet::DenseNet(const std::vector<DenseLayerSpec>& specs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const DenseLayerSpec& s = specs[i];
    if (s.in == 0 || s.out == 0) {
      throw InvalidParameter(fmt::format("dense layer {}: zero width", i));
    }
    if (i > 0 && specs[i - 1].out != s.in) {
      throw ShapeError(fmt::format("dense layer {}: input width {} after output width {}", i,
                                   s.in, specs[i - 1].out));
    }
    if (s.zero_init && s.spectral) {
      throw InvalidParameter(fmt::format("dense layer {}: zero weights cannot be normalized", i));
    }
    DenseLayer layer;
    layer.w = Mat(s.out, s.in);
    if (!s.zero_init) {
      const double gain = s.act == Activation::relu ? 2.0 : 1.0;
      const double scale = std::sqrt(gain / static_cast<double>(s.in));
      for (double& v : layer.w.values()) v = scale * normal(rng);
    }
    layer.b = Vec(s.out, 0.0);
    layer.act = s.act;
    if (s.norm) {
      if (s.norm->d != s.out) {
        throw ShapeError(fmt::format("dense layer {}: normalization width {} for output {}", i,
                                     s.norm->d, s.out));
      }
      layer.norm.emplace(*s.norm, rng());
    }
    layer.spectral = s.spectral;
    layer.power_iterations = s.power_iterations;
    if (s.spectral) layer.sn = init_spectral_state(s.out, s.in, rng());
    layers_.push_back(std::move(layer));
  }
}

std::size_t DenseNet::input_dim() const { return layers_.empty() ? 0 : layers_.front().w.cols(); }

std::size_t DenseNet::output_dim() const { return layers_.empty() ? 0 : layers_.back().w.rows(); }

Mat DenseNet::forward(const Mat& x, std::span<const int> labels, ForwardMode mode,
                      bool update_spectral) {
  Mat h = x;
  for (DenseLayer& layer : layers_) {
    layer.w_eff = layer.spectral ? spectral_normalize(layer.w, layer.sn,
                                                      update_spectral ? layer.power_iterations : 0)
                                 : layer.w;
    Mat z = matmul(layer.w_eff, h);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      const double bias = layer.b[r];
      for (double& v : z.row(r)) v += bias;
    }
    if (layer.norm) z = layer.norm->forward(z, labels, mode);
    apply_activation(layer.act, z);
    layer.x_in = std::move(h);
    layer.out = z;
    h = std::move(z);
  }
  return h;
}

Mat DenseNet::backward(const Mat& out_bar) {
  Mat g = out_bar;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    DenseLayer& layer = *it;
    activation_backward(layer.act, layer.out, g);
    if (layer.norm) {
      LayerGrads ng = layer.norm->backward(g);
      g = std::move(ng.d_input);
      layer.dnorm = std::move(ng);
    }
    Mat dw_eff = matmul_nt(g, layer.x_in);
    layer.dw = layer.spectral ? spectral_backward(dw_eff, layer.w_eff, layer.sn)
                              : std::move(dw_eff);
    layer.db = row_sums(g);
    g = matmul_tn(layer.w_eff, g);
  }
  return g;
}

void DenseNet::adam_step(const AdamConfig& cfg) {
  for (DenseLayer& layer : layers_) {
    if (layer.dw.rows() != layer.w.rows() || layer.dw.cols() != layer.w.cols()) {
      throw CacheMismatch("DenseNet::adam_step: no gradients from a backward pass");
    }
    wcnorm::adam_step(cfg, layer.adam_w, layer.w.values(), layer.dw.values());
    wcnorm::adam_step(cfg, layer.adam_b, layer.b, layer.db);
    if (layer.norm && layer.dnorm) {
      auto params = layer.norm->params().groups();
      const auto grads = layer.dnorm->groups();
      layer.adam_norm.resize(params.size());
      for (std::size_t g = 0; g < params.size(); ++g) {
        wcnorm::adam_step(cfg, layer.adam_norm[g], params[g].values, grads[g].values);
      }
    }
  }
}

void DenseNet::freeze() {
  for (DenseLayer& layer : layers_) {
    if (layer.norm) layer.norm->freeze();
  }
}

const Mat* DenseNet::first_normalized() const {
  for (const DenseLayer& layer : layers_) {
    if (layer.norm) {
      const ForwardCache* c = layer.norm->last_cache();
      return c ? &c->x_hat : nullptr;
    }
  }
  return nullptr;
}

void DenseNet::save(Checkpoint& ckpt, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& layer = layers_[i];
    const std::string p = fmt::format("{}.{}", prefix, i);
    ckpt.put(p + ".w", layer.w);
    ckpt.put(p + ".b", layer.b);
    save_adam(ckpt, p + ".adam.w", layer.adam_w);
    save_adam(ckpt, p + ".adam.b", layer.adam_b);
    if (layer.spectral) {
      ckpt.put(p + ".sn.u", layer.sn.u);
      ckpt.put(p + ".sn.v", layer.sn.v);
      ckpt.put_scalar(p + ".sn.sigma", layer.sn.sigma);
    }
    if (layer.norm) {
      save_params(ckpt, p + ".norm", layer.norm->params());
      save_running(ckpt, p + ".norm", layer.norm->running());
      const auto groups = layer.norm->params().groups();
      for (std::size_t g = 0; g < layer.adam_norm.size(); ++g) {
        save_adam(ckpt, fmt::format("{}.adam.norm.{}", p, groups[g].name), layer.adam_norm[g]);
      }
    }
  }
}

void DenseNet::load(const Checkpoint& ckpt, const std::string& prefix) {
  std::vector<DenseLayer> loaded = layers_;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    DenseLayer& layer = loaded[i];
    const std::string p = fmt::format("{}.{}", prefix, i);
    layer.w = ckpt.get_mat(p + ".w", layer.w.rows(), layer.w.cols());
    layer.b = ckpt.get_vec(p + ".b", layer.b.size());
    layer.adam_w = load_adam(ckpt, p + ".adam.w", layer.w.values().size());
    layer.adam_b = load_adam(ckpt, p + ".adam.b", layer.b.size());
    if (layer.spectral) {
      layer.sn.u = ckpt.get_vec(p + ".sn.u", layer.w.rows());
      layer.sn.v = ckpt.get_vec(p + ".sn.v", layer.w.cols());
      layer.sn.sigma = ckpt.get_scalar(p + ".sn.sigma");
    }
    if (layer.norm) {
      load_params(ckpt, p + ".norm", layer.norm->params());
      load_running(ckpt, p + ".norm", layer.norm->running());
      const auto groups = layer.norm->params().groups();
      layer.adam_norm.assign(groups.size(), AdamState{});
      for (std::size_t g = 0; g < groups.size(); ++g) {
        layer.adam_norm[g] = load_adam(ckpt, fmt::format("{}.adam.norm.{}", p, groups[g].name),
                                       groups[g].values.size());
      }
    }
  }
  layers_ = std::move(loaded);
}

}  // namespace wcnorm
