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

#include "wcnorm/gan_trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "wcnorm/datasets.hpp"
#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

// Seeds of the independent random streams of one run.
constexpr std::uint64_t kStreamData = 0x5eed0001;
constexpr std::uint64_t kStreamGen = 0x5eed0002;
constexpr std::uint64_t kStreamDisc = 0x5eed0003;
constexpr std::uint64_t kStreamEval = 0x5eed0004;

struct Batch {
  Mat x;
  std::vector<int> labels;
};

Mat sample_latent(std::size_t dim, std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat z(dim, m);
  for (double& v : z.values()) v = normal(rng);
  return z;
}

std::vector<int> sample_labels(std::size_t n_classes, std::size_t m, std::mt19937_64& rng) {
  if (n_classes == 0) return {};
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n_classes) - 1);
  std::vector<int> y(m);
  for (int& v : y) v = pick(rng);
  return y;
}

// Discriminator input: samples stacked over one-hot labels when conditional.
void write_disc_input(Mat& in, std::size_t col0, const Mat& x, std::span<const int> labels,
                      std::size_t n_classes) {
  for (std::size_t i = 0; i < x.cols(); ++i) {
    in(0, col0 + i) = x(0, i);
    in(1, col0 + i) = x(1, i);
    if (n_classes > 0) in(2 + static_cast<std::size_t>(labels[i]), col0 + i) = 1.0;
  }
}

Mat scaled(const Mat& x, double s) { return s * x; }

double spectral_norm_exact(const Mat& w) {
  const EigenDecomposition eig = symmetric_eigendecomposition(matmul_tn(w, w));
  return std::sqrt(std::max(eig.values.front(), 0.0));
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NonFiniteLoss(fmt::format("{} is not finite", what));
}

Checkpoint snapshot(const TrainConfig& cfg, const LayerConfig& layer, const DenseNet& gen,
                    const DenseNet& disc, std::size_t iter) {
  Checkpoint ckpt;
  ckpt.iteration = iter;
  ckpt.meta["dataset"] = cfg.dataset;
  ckpt.meta["layer"] = std::string(variant_name(layer).value_or("custom"));
  ckpt.meta["seed"] = fmt::format("{}", cfg.seed);
  gen.save(ckpt, "gen");
  disc.save(ckpt, "disc");
  return ckpt;
}

}  // namespace

void TrainConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw InvalidParameter(fmt::format("train config: {} must be positive", name));
  };
  positive(latent_dim, "latent_dim");
  positive(gen_width, "gen_width");
  positive(gen_hidden_layers, "gen_hidden_layers");
  positive(disc_width, "disc_width");
  positive(disc_hidden_layers, "disc_hidden_layers");
  positive(batch_size, "batch_size");
  positive(disc_batch_size, "disc_batch_size");
  positive(disc_steps, "disc_steps");
  positive(power_iterations, "power_iterations");
  positive(log_every, "log_every");
  positive(eval_samples, "eval_samples");
  positive(dataset_size, "dataset_size");
  if (batch_size < 2) throw InvalidParameter("train config: batch_size must be at least 2");
  auto in_range = [](double v, double lo, double hi, const char* name) {
    if (!(v >= lo && v <= hi)) {
      throw InvalidParameter(fmt::format("train config: {}={} outside [{}, {}]", name, v, lo, hi));
    }
  };
  in_range(lr_gen, 1e-12, 1.0, "lr_gen");
  in_range(lr_disc, 1e-12, 1.0, "lr_disc");
  in_range(beta1, 0.0, 0.999999, "beta1");
  in_range(beta2, 0.0, 0.999999, "beta2");
  in_range(output_scale, 1e-6, 1e6, "output_scale");
  (void)make_dataset(dataset, 0, 0);  // UnknownDataset for a bad name
  LayerConfig probe = layer;
  probe.d = gen_width;
  if (probe.conditional()) probe.n_classes = std::max<std::size_t>(probe.n_classes, 2);
  probe.validate();
}

std::string_view to_string(RunOutcome outcome) {
  return outcome == RunOutcome::completed ? "completed" : "degenerated";
}

HingeLosses hinge_losses(std::span<const double> d_real, std::span<const double> d_fake) {
  HingeLosses out;
  double real = 0.0;
  for (double s : d_real) real += std::max(0.0, 1.0 - s);
  double fake = 0.0;
  double gen = 0.0;
  for (double s : d_fake) {
    fake += std::max(0.0, 1.0 + s);
    gen -= s;
  }
  if (!d_real.empty()) real /= static_cast<double>(d_real.size());
  if (!d_fake.empty()) {
    fake /= static_cast<double>(d_fake.size());
    gen /= static_cast<double>(d_fake.size());
  }
  out.disc = real + fake;
  out.gen = gen;
  return out;
}

Coverage mode_coverage(const Mat& samples, const Mat& centers, double radius) {
  if (!(radius > 0.0)) {
    throw InvalidParameter(fmt::format("mode_coverage: radius must be positive, got {}", radius));
  }
  if (samples.rows() != centers.rows()) {
    throw ShapeError(fmt::format("mode_coverage: {}-D samples against {}-D centers",
                                 samples.rows(), centers.rows()));
  }
  const std::size_t k = samples.cols();
  const std::size_t n_modes = centers.cols();
  Coverage out;
  if (k == 0 || n_modes == 0) return out;
  std::vector<std::size_t> hits(n_modes, 0);
  std::size_t good = 0;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < k; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_mode = 0;
    for (std::size_t c = 0; c < n_modes; ++c) {
      double dist2 = 0.0;
      for (std::size_t r = 0; r < samples.rows(); ++r) {
        const double diff = samples(r, i) - centers(r, c);
        dist2 += diff * diff;
      }
      if (dist2 < best) {
        best = dist2;
        best_mode = c;
      }
    }
    if (best <= r2) {
      ++hits[best_mode];
      ++good;
    }
  }
  const double threshold = static_cast<double>(k) / (4.0 * static_cast<double>(n_modes));
  for (std::size_t h : hits) {
    if (static_cast<double>(h) >= threshold) ++out.modes_covered;
  }
  out.hq_fraction = static_cast<double>(good) / static_cast<double>(k);
  return out;
}

double whitened_cov_deviation(const Mat& x_hat) {
  const Mat cov = empirical_covariance(x_hat, row_means(x_hat));
  return max_abs_diff(cov, Mat::identity(cov.rows()));
}

DenseNet make_generator(const TrainConfig& cfg, const LayerConfig& layer, std::uint64_t seed) {
  std::vector<DenseLayerSpec> specs;
  std::size_t in = cfg.latent_dim;
  for (std::size_t i = 0; i < cfg.gen_hidden_layers; ++i) {
    specs.push_back({in, cfg.gen_width, Activation::relu, layer, false, false});
    in = cfg.gen_width;
  }
  specs.push_back({in, 2, Activation::tanh, std::nullopt, false, false});
  return DenseNet(specs, seed);
}

DenseNet make_discriminator(const TrainConfig& cfg, std::size_t label_dim, std::uint64_t seed) {
  std::vector<DenseLayerSpec> specs;
  std::size_t in = 2 + label_dim;
  for (std::size_t i = 0; i < cfg.disc_hidden_layers; ++i) {
    specs.push_back({in, cfg.disc_width, Activation::relu, std::nullopt, cfg.spectral_norm, false,
                     cfg.power_iterations});
    in = cfg.disc_width;
  }
  specs.push_back({in, 1, Activation::linear, std::nullopt, cfg.spectral_norm, false,
                   cfg.power_iterations});
  return DenseNet(specs, seed);
}

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  const Dataset data = make_dataset(cfg.dataset, cfg.dataset_size, cfg.seed ^ kStreamData);
  LayerConfig layer = cfg.layer;
  layer.d = cfg.gen_width;
  layer.n_classes = layer.conditional() ? data.n_classes : 0;
  const std::size_t n_cls = layer.n_classes;

  DenseNet gen = make_generator(cfg, layer, cfg.seed ^ kStreamGen);
  DenseNet disc = make_discriminator(cfg, n_cls, cfg.seed ^ kStreamDisc);
  AdamConfig adam_gen{cfg.lr_gen, cfg.beta1, cfg.beta2, 1e-8};
  AdamConfig adam_disc{cfg.lr_disc, cfg.beta1, cfg.beta2, 1e-8};

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.dataset_size - 1);

  std::mt19937_64 eval_rng(cfg.seed ^ kStreamEval);
  const Mat z_eval = sample_latent(cfg.latent_dim, cfg.eval_samples, eval_rng);
  std::vector<int> y_eval;
  if (n_cls > 0) {
    y_eval.resize(cfg.eval_samples);
    for (std::size_t i = 0; i < y_eval.size(); ++i) y_eval[i] = static_cast<int>(i % n_cls);
  }
  const double radius = 3.0 * data.sigma;

  TrainResult result;
  result.n_modes = data.centers.cols();
  result.checkpoint = snapshot(cfg, layer, gen, disc, 0);

  const std::size_t b = cfg.disc_batch_size;
  const std::size_t bg = cfg.batch_size;
  const std::size_t d_in = 2 + n_cls;
  double disc_loss = 0.0;
  double gen_loss = 0.0;

  for (std::size_t it = 1; it <= cfg.n_iters; ++it) {
    if (cfg.lr_decay) {
      const double frac = 1.0 - static_cast<double>(it - 1) / static_cast<double>(cfg.n_iters);
      adam_gen.lr = cfg.lr_gen * frac;
      adam_disc.lr = cfg.lr_disc * frac;
    }
    try {
      for (std::size_t s = 0; s < cfg.disc_steps; ++s) {
        Batch real{Mat(2, b), std::vector<int>(n_cls > 0 ? b : 0)};
        for (std::size_t i = 0; i < b; ++i) {
          const std::size_t j = pick(rng);
          real.x(0, i) = data.x(0, j);
          real.x(1, i) = data.x(1, j);
          if (n_cls > 0) real.labels[i] = data.labels[j];
        }
        const Mat z = sample_latent(cfg.latent_dim, b, rng);
        const std::vector<int> y_fake = sample_labels(n_cls, b, rng);
        const Mat x_fake = scaled(gen.forward(z, y_fake, ForwardMode::train), cfg.output_scale);

        Mat in(d_in, 2 * b);
        write_disc_input(in, 0, real.x, real.labels, n_cls);
        write_disc_input(in, b, x_fake, y_fake, n_cls);
        const Mat scores = disc.forward(in, {}, ForwardMode::train, true);
        const auto sv = scores.values();
        const HingeLosses losses = hinge_losses(sv.subspan(0, b), sv.subspan(b, b));
        disc_loss = losses.disc;
        require_finite(disc_loss, "discriminator loss");

        Mat g(1, 2 * b);
        const double inv_b = 1.0 / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) {
          g(0, i) = sv[i] < 1.0 ? -inv_b : 0.0;
          g(0, b + i) = sv[b + i] > -1.0 ? inv_b : 0.0;
        }
        disc.backward(g);
        disc.adam_step(adam_disc);
      }

      const Mat z = sample_latent(cfg.latent_dim, bg, rng);
      const std::vector<int> y_fake = sample_labels(n_cls, bg, rng);
      const Mat x_fake = scaled(gen.forward(z, y_fake, ForwardMode::train), cfg.output_scale);
      Mat in(d_in, bg);
      write_disc_input(in, 0, x_fake, y_fake, n_cls);
      const Mat scores = disc.forward(in, {}, ForwardMode::train, true);
      gen_loss = hinge_losses({}, scores.values()).gen;
      require_finite(gen_loss, "generator loss");
      const Mat in_bar = disc.backward(Mat(1, bg, -1.0 / static_cast<double>(bg)));
      Mat x_bar(2, bg);
      for (std::size_t i = 0; i < bg; ++i) {
        x_bar(0, i) = cfg.output_scale * in_bar(0, i);
        x_bar(1, i) = cfg.output_scale * in_bar(1, i);
      }
      gen.backward(x_bar);
      gen.adam_step(adam_gen);

      if (it % cfg.log_every == 0 || it == cfg.n_iters) {
        MetricsRecord rec;
        rec.iter = it;
        rec.gen_loss = gen_loss;
        rec.disc_loss = disc_loss;
        const Mat* x_hat = gen.first_normalized();
        rec.whitened_cov_dev = x_hat ? whitened_cov_deviation(*x_hat) : 0.0;
        require_finite(rec.whitened_cov_dev, "whitened covariance deviation");

        DenseNet frozen = gen;
        frozen.freeze();
        const Mat samples =
            scaled(frozen.forward(z_eval, y_eval, ForwardMode::infer), cfg.output_scale);
        if (!all_finite(samples)) throw NonFiniteLoss("generated samples are not finite");
        const Coverage cov = mode_coverage(samples, data.centers, radius);
        rec.modes_covered = cov.modes_covered;
        rec.hq_fraction = cov.hq_fraction;
        if (cfg.log_wallclock) {
          rec.wallclock_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        }
        double sn_max = 0.0;
        for (const DenseLayer& l : disc.layers()) {
          if (l.spectral) sn_max = std::max(sn_max, spectral_norm_exact(l.w_eff));
        }
        result.max_disc_spectral_norm.push_back(sn_max);
        result.metrics.push_back(rec);
        result.checkpoint = snapshot(cfg, layer, gen, disc, it);
      }
    } catch (const Error& e) {
      result.outcome = RunOutcome::degenerated;
      result.degenerated_at = it;
      result.degeneration_reason = e.what();
      return result;
    }
  }
  return result;
}

}  // namespace wcnorm
