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

#include "wcnorm/spectral_norm.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

double normalize_in_place(Vec& x) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double norm = std::sqrt(ss);
  if (!(norm > 0.0) || !std::isfinite(norm)) return 0.0;
  for (double& v : x) v /= norm;
  return norm;
}

}  // namespace

SpectralState init_spectral_state(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralState s;
  s.u.resize(rows);
  for (double& x : s.u) x = normal(rng);
  if (normalize_in_place(s.u) == 0.0 && rows > 0) s.u[0] = 1.0;
  s.v.assign(cols, 0.0);
  return s;
}

Mat spectral_normalize(const Mat& w, SpectralState& state, std::size_t iterations) {
  if (state.u.size() != w.rows() || state.v.size() != w.cols()) {
    throw ShapeError(fmt::format("spectral_normalize: state is {}x{} for a {}x{} weight",
                                 state.u.size(), state.v.size(), w.rows(), w.cols()));
  }
  if (max_abs(w) == 0.0) throw DegenerateWeight("spectral_normalize: weight matrix is zero");
  if (state.sigma == 0.0 && iterations == 0) iterations = 1;
  for (std::size_t it = 0; it < iterations; ++it) {
    Vec v = matvec(transpose(w), state.u);
    if (normalize_in_place(v) == 0.0) {
      throw DegenerateWeight("spectral_normalize: power iteration collapsed (W^T u = 0)");
    }
    Vec u = matvec(w, v);
    if (normalize_in_place(u) == 0.0) {
      throw DegenerateWeight("spectral_normalize: power iteration collapsed (W v = 0)");
    }
    state.u = std::move(u);
    state.v = std::move(v);
  }
  // sigma = u^T W v for the current W, so the backward rule holds with or
  // without power-iteration steps.
  const Vec wv = matvec(w, state.v);
  double sigma = 0.0;
  for (std::size_t i = 0; i < wv.size(); ++i) sigma += state.u[i] * wv[i];
  if (!(sigma > 0.0)) throw DegenerateWeight("spectral_normalize: non-positive sigma estimate");
  state.sigma = sigma;
  return (1.0 / state.sigma) * w;
}

Mat spectral_backward(const Mat& g_sn, const Mat& w_sn, const SpectralState& state) {
  const double proj = dot(g_sn, w_sn);
  Mat g = g_sn;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) -= proj * state.u[i] * state.v[j];
  }
  g *= 1.0 / state.sigma;
  return g;
}

}  // namespace wcnorm
