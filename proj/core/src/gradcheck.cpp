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

#include "wcnorm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

struct Problem {
  LayerConfig cfg;
  Mat x;
  std::vector<int> labels;
  ColoringParams params;
  Mat probe;
};

Problem make_problem(const LayerConfig& cfg, std::uint64_t seed, std::size_t m) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.2, 1.0);
  Problem p;
  p.cfg = cfg;
  const std::size_t d = cfg.d;

  // Correlated but well-conditioned batch with a nonzero mean.
  Mat mix = Mat::identity(d);
  const double spread = 0.5 / std::sqrt(static_cast<double>(d));
  for (double& v : mix.values()) v += spread * normal(rng);
  Mat z(d, m);
  for (double& v : z.values()) v = normal(rng);
  p.x = matmul(mix, z);
  for (std::size_t r = 0; r < d; ++r) {
    const double offset = normal(rng);
    for (double& v : p.x.row(r)) v += offset;
  }

  if (cfg.conditional()) {
    p.labels.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      p.labels[i] = static_cast<int>(i % cfg.n_classes);
    }
    std::shuffle(p.labels.begin(), p.labels.end(), rng);
  }

  // Generic parameters: every group away from its structured initial value.
  p.params = init_params(cfg, seed);
  for (ParamGroup g : p.params.groups()) {
    const bool positive = g.name == "assoc";
    for (double& v : g.values) v += positive ? uniform(rng) : 0.5 * normal(rng);
  }

  p.probe = Mat(d, m);
  for (double& v : p.probe.values()) v = normal(rng);
  return p;
}

// Neumaier-compensated sum of R o Y. Plain summation rounding, divided by
// the step, would swamp gradient entries near zero.
double probe_loss(const Problem& p, const Mat& x, const ColoringParams& params) {
  RunningStats running = RunningStats::initial(p.cfg.d, p.cfg.momentum);
  const LayerOutput out = wc_forward(x, p.labels, params, p.cfg, ForwardMode::train, running);
  const auto r = p.probe.values();
  const auto y = out.y.values();
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double term = r[i] * y[i];
    const double t = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + carry;
}

void compare(GradReport& report, const std::string& group, std::span<const double> analytic,
             std::span<const double> numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double err = relative_error(analytic[i], numeric[i]);
    worst = std::max(worst, err);
    if (err > report.max_rel_error || report.worst_group.empty()) {
      report.max_rel_error = err;
      report.worst_group = group;
      report.worst_index = i;
    }
  }
  report.group_errors[group] = worst;
}

}  // namespace

Vec finite_difference(const ScalarFn& loss, std::span<const double> point, double step) {
  if (!(step > 0.0)) {
    throw InvalidParameter(fmt::format("finite_difference: step must be positive, got {}", step));
  }
  Vec x(point.begin(), point.end());
  Vec grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double f_plus = loss(x);
    x[i] = saved - step;
    const double f_minus = loss(x);
    x[i] = saved;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      throw NonFiniteLoss(fmt::format("finite_difference: non-finite loss at coordinate {}", i));
    }
    grad[i] = (f_plus - f_minus) / (2.0 * step);
  }
  return grad;
}

double relative_error(double a, double b) noexcept {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  const double err = std::abs(a - b) / scale;
  return std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
}

GradReport check_layer(const LayerConfig& cfg, std::uint64_t seed, double tolerance,
                       std::size_t m, double step) {
  cfg.validate();
  const Problem p = make_problem(cfg, seed, m);

  GradReport report;
  report.variant = std::string(variant_name(cfg).value_or("custom"));
  report.tolerance = tolerance;

  RunningStats running = RunningStats::initial(cfg.d, cfg.momentum);
  LayerOutput out = wc_forward(p.x, p.labels, p.params, cfg, ForwardMode::train, running);
  const LayerGrads grads = wc_backward(p.probe, out.cache, p.params);

  const Vec numeric_input = finite_difference(
      [&](std::span<const double> v) {
        return probe_loss(p, Mat(cfg.d, m, Vec(v.begin(), v.end())), p.params);
      },
      p.x.values(), step);
  compare(report, "input", grads.d_input.values(), numeric_input);

  const auto analytic_groups = grads.groups();
  const auto param_groups = p.params.groups();
  if (analytic_groups.size() != param_groups.size()) {
    throw ShapeError(fmt::format("check_layer: {} gradient groups for {} parameter groups",
                                 analytic_groups.size(), param_groups.size()));
  }
  for (std::size_t g = 0; g < param_groups.size(); ++g) {
    const std::string name(param_groups[g].name);
    const Vec numeric = finite_difference(
        [&](std::span<const double> v) {
          ColoringParams q = p.params;
          auto target = q.groups()[g].values;
          std::copy(v.begin(), v.end(), target.begin());
          return probe_loss(p, p.x, q);
        },
        param_groups[g].values, step);
    compare(report, name, analytic_groups[g].values, numeric);
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

GradReport check_variant(std::string_view variant, const GradcheckShape& shape,
                         std::uint64_t seed, double tolerance) {
  const LayerConfig cfg = LayerConfig::named(variant, shape.d, shape.n_classes, shape.dict_size);
  return check_layer(cfg, seed, tolerance, shape.m);
}

}  // namespace wcnorm
