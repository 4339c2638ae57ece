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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are pinned here and never relaxed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "test_util.hpp"
#include "wcnorm/checkpoint.hpp"
#include "wcnorm/gan_trainer.hpp"
#include "wcnorm/linalg.hpp"
#include "wcnorm/normstats.hpp"
#include "wcnorm/wclayers.hpp"
#include "wcnorm_cli/commands.hpp"
#include "wcnorm_cli/run_io.hpp"

namespace wcnorm {
namespace {

using testing::max_abs_minus_identity;
using testing::naive_covariance;
using testing::naive_matmul;
using testing::naive_transpose;
using testing::random_mat;
using testing::random_pd;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Gaussian batch with covariance random_pd(d) and per-channel offsets.
Mat gaussian_batch(std::size_t d, std::size_t m, std::uint64_t seed) {
  const Mat chol = cholesky(random_pd(d, seed)).mat();
  Mat x = matmul(chol, random_mat(d, m, seed + 7919));
  for (std::size_t k = 0; k < d; ++k) {
    const double offset = 0.25 * static_cast<double>(k % 5) - 0.5;
    for (double& v : x.row(k)) v += offset;
  }
  return x;
}

Outcome whitening_correctness() {
  constexpr double kCovTol = 0.02;
  constexpr double kMeanTol = 1e-12;
  constexpr double kBudgetS = 10.0;
  const auto t0 = Clock::now();
  double worst_cov = 0.0;
  double worst_mean = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (std::size_t d : {2u, 8u, 32u}) {
      const Mat x = gaussian_batch(d, 4096, 1000 * seed + d);
      const Mat y = whiten(x, compute_batch_stats(x, 1e-3));
      worst_cov = std::max(worst_cov, max_abs_minus_identity(empirical_covariance(y, row_means(y))));
      for (double mu : row_means(y)) worst_mean = std::max(worst_mean, std::abs(mu));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst_cov <= kCovTol && worst_mean <= kMeanTol && elapsed < kBudgetS,
          fmt::format("max|Cov-I|={:.2e} (<= {}), max|mean|={:.2e} (<= {}), {:.2f}s (< {}s)",
                      worst_cov, kCovTol, worst_mean, kMeanTol, elapsed, kBudgetS)};
}

Outcome factorization_identities() {
  constexpr double kTol = 1e-9;
  constexpr double kBudgetS = 5.0;
  const auto t0 = Clock::now();
  double worst_llt = 0.0;
  double worst_inv = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t d = 1 + seed % 64;
    const Mat s = random_pd(d, 50000 + seed);
    const LowerTriangular l = cholesky(s);
    worst_llt = std::max(worst_llt,
                         testing::rel_frobenius(naive_matmul(l.mat(), naive_transpose(l.mat())), s));
    const Mat w = invert_lower_triangular(l);
    worst_inv = std::max(
        worst_inv, max_abs_minus_identity(naive_matmul(naive_matmul(naive_transpose(w), w), s)));
  }
  const double elapsed = seconds_since(t0);
  return {worst_llt <= kTol && worst_inv <= kTol && elapsed < kBudgetS,
          fmt::format("LL^T rel={:.2e}, |W^TW Sigma - I|={:.2e} (<= {}), {:.2f}s (< {}s)",
                      worst_llt, worst_inv, kTol, elapsed, kBudgetS)};
}

Outcome gradient_certification() {
  constexpr double kTol = 1e-5;
  constexpr double kBudgetS = 60.0;
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  struct Shape {
    std::size_t d, m, n;
  };
  for (const Shape& s : {Shape{4, 16, 5}, Shape{8, 32, 5}, Shape{2, 8, 3}}) {
    cli::GradcheckOptions opt;
    opt.d = s.d;
    opt.m = s.m;
    opt.n_classes = s.n;
    opt.tolerance = kTol;
    std::ostringstream out;
    const int code = cli::cmd_gradcheck(opt, out);
    std::size_t passes = 0;
    const std::string text = out.str();
    for (std::size_t p = text.find(" PASS\n"); p != std::string::npos;
         p = text.find(" PASS\n", p + 1)) {
      ++passes;
    }
    ok = ok && code == cli::kExitOk && passes == 12;
    detail += fmt::format("d={} m={} n={}: {}/12 ", s.d, s.m, s.n, passes);
    if (code != cli::kExitOk) std::cout << text;
  }
  const double elapsed = seconds_since(t0);
  return {ok && elapsed < kBudgetS,
          fmt::format("{}at tol {}, {:.2f}s (< {}s)", detail, kTol, elapsed, kBudgetS)};
}

Mat train_forward(const Mat& x, std::span<const int> labels, const ColoringParams& p,
                  const LayerConfig& cfg) {
  RunningStats rs = RunningStats::initial(cfg.d, cfg.momentum);
  return wc_forward(x, labels, p, cfg, ForwardMode::train, rs).y;
}

Outcome reduction_identities() {
  constexpr double kTol = 1e-12;
  double err_a = 0.0;
  double err_b = 0.0;
  bool exact_c = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // (a) scalar whitening with diagonal coloring against per-channel BN.
    const LayerConfig wc1 = LayerConfig::named("WC-diag", 1);
    ColoringParams p1 = init_params(wc1, seed);
    p1.gamma(0, 0) = 0.5 + 0.1 * static_cast<double>(seed);
    p1.beta[0] = -0.3;
    const Mat x1 = random_mat(1, 64, seed, 2.0);
    const Mat bn = bn_forward(x1, BNParams{Vec{p1.gamma(0, 0)}, Vec{-0.3}, {}, {}}, wc1.eps);
    err_a = std::max(err_a, max_abs_diff(train_forward(x1, {}, p1, wc1), bn));

    // (b) one-hot soft assignment against the class bank.
    const std::size_t n = 5;
    const LayerConfig sa = LayerConfig::named("cWC_sa", 4, n, n);
    const LayerConfig cb = LayerConfig::named("cWC", 4, n);
    ColoringParams psa = init_params(sa, seed);
    psa.gamma = random_mat(4, 4, seed + 1, 0.5);
    psa.beta = random_mat(4, 1, seed + 2).column(0);
    psa.beta_bank = random_mat(n, 4, seed + 3, 0.5);
    psa.dict = random_mat(n, 16, seed + 4, 0.5);
    psa.assoc = Mat::identity(n);
    ColoringParams pcb = init_params(cb, seed);
    pcb.gamma = psa.gamma;
    pcb.beta = psa.beta;
    pcb.beta_bank = psa.beta_bank;
    pcb.gamma_bank = psa.dict;
    const Mat x = testing::correlated_batch(4, 20, seed + 5);
    std::vector<int> labels(20);
    for (std::size_t i = 0; i < 20; ++i) labels[i] = static_cast<int>((i * 3 + seed) % n);
    err_b = std::max(err_b, max_abs_diff(train_forward(x, labels, psa, sa),
                                         train_forward(x, labels, pcb, cb)));

    // (c) zero class banks against the unconditional layer.
    const LayerConfig u = LayerConfig::named("WC", 4);
    const LayerConfig c = LayerConfig::named("cWC", 4, n);
    ColoringParams pu = init_params(u, seed);
    pu.gamma = psa.gamma;
    pu.beta = psa.beta;
    ColoringParams pc = init_params(c, seed);
    pc.gamma = pu.gamma;
    pc.beta = pu.beta;
    exact_c = exact_c && train_forward(x, labels, pc, c) == train_forward(x, {}, pu, u);
  }
  return {err_a <= kTol && err_b <= kTol && exact_c,
          fmt::format("(a) {:.2e} (b) {:.2e} (<= {}), (c) exact={}", err_a, err_b, kTol,
                      exact_c)};
}

Outcome capacity_preservation() {
  constexpr double kTol = 1e-9;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t d = 1 + seed % 16;
    const LayerConfig cfg = LayerConfig::named("WC", d);
    const Mat x = gaussian_batch(d, 32 + 4 * d, 7000 + seed);
    const BatchStats bs = compute_batch_stats(x, cfg.eps);
    ColoringParams p = init_params(cfg, seed);
    p.gamma = bs.chol.mat();
    p.beta = bs.mu;
    worst = std::max(worst, max_abs_diff(train_forward(x, {}, p, cfg), x));
  }
  return {worst <= kTol, fmt::format("max|WC(x) - x|={:.2e} (<= {})", worst, kTol)};
}

Outcome gradient_routing() {
  bool zeros = true;
  bool dict_nonzero = true;
  for (const char* name : {"cWC_sa", "cWC_sa-cls-only", "cWC", "cWC-cls-only"}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 5;
      const LayerConfig cfg = LayerConfig::named(name, 4, n);
      ColoringParams p = init_params(cfg, seed);
      if (!p.gamma_bank.empty()) p.gamma_bank = random_mat(n, 16, seed + 1, 0.3);
      if (!p.assoc.empty()) p.assoc = random_mat(n, p.assoc.cols(), seed + 2);
      p.beta_bank = random_mat(n, 4, seed + 3);
      const int absent = static_cast<int>(seed % n);
      std::vector<int> labels;
      for (std::size_t i = 0; labels.size() < 24; ++i) {
        const int y = static_cast<int>(i % n);
        if (y != absent) labels.push_back(y);
      }
      RunningStats rs = RunningStats::initial(4);
      LayerOutput out = wc_forward(testing::correlated_batch(4, 24, seed + 4), labels, p, cfg,
                                   ForwardMode::train, rs);
      const LayerGrads g = wc_backward(random_mat(4, 24, seed + 5), out.cache, p);
      const std::size_t a = static_cast<std::size_t>(absent);
      for (double v : g.d_beta_bank.row(a)) zeros = zeros && v == 0.0;
      if (cfg.class_bank()) {
        for (double v : g.d_gamma_bank.row(a)) zeros = zeros && v == 0.0;
      }
      if (cfg.soft_assign()) {
        for (double v : g.d_assoc.row(a)) zeros = zeros && v == 0.0;
        for (std::size_t r = 0; r < g.d_dict.rows(); ++r) {
          double mass = 0.0;
          for (double v : g.d_dict.row(r)) mass += std::abs(v);
          dict_nonzero = dict_nonzero && mass > 0.0;
        }
      }
    }
  }
  return {zeros && dict_nonzero,
          fmt::format("absent-class grads exactly zero={}, every dict row nonzero={}", zeros,
                      dict_nonzero)};
}

Outcome zca_cholesky_relation() {
  constexpr double kTol = 1e-8;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t d = 2 + seed % 31;
    const Mat s = random_pd(d, 90000 + seed);
    // W_chol^{-1} = L.
    const Mat q = naive_matmul(zca_whitening_matrix(s), cholesky(s).mat());
    worst = std::max(worst, max_abs_minus_identity(naive_matmul(naive_transpose(q), q)));
  }
  return {worst <= kTol, fmt::format("max|Q^TQ - I|={:.2e} (<= {})", worst, kTol)};
}

Outcome running_statistics() {
  constexpr double kTol = 0.1;
  const std::size_t d = 8;
  const std::uint64_t dist = 31337;  // fixed distribution: covariance random_pd(d, dist)
  RunningStats rs = RunningStats::initial(d, 0.1);
  for (std::uint64_t t = 0; t < 500; ++t) {
    Mat x = matmul(cholesky(random_pd(d, dist)).mat(), random_mat(d, 256, 100000 + t));
    for (std::size_t k = 0; k < d; ++k) {
      for (double& v : x.row(k)) v += 1.0 - 0.25 * static_cast<double>(k);
    }
    rs = update_running(std::move(rs), compute_batch_stats(x, 1e-3));
  }
  rs = freeze(std::move(rs), 1e-3);
  Mat held_out = matmul(cholesky(random_pd(d, dist)).mat(), random_mat(d, 4096, 7));
  for (std::size_t k = 0; k < d; ++k) {
    for (double& v : held_out.row(k)) v += 1.0 - 0.25 * static_cast<double>(k);
  }
  const Mat y = inference_whiten(held_out, rs);
  const double dev = max_abs_minus_identity(naive_covariance(y));
  return {dev <= kTol, fmt::format("held-out max|Cov-I|={:.3f} (<= {}) after {} updates", dev,
                                   kTol, rs.steps)};
}

Outcome toy_stability(std::string& report) {
  constexpr std::size_t kSeeds = 5;
  constexpr std::size_t kMinModes = 7;
  constexpr std::size_t kMinSeeds = 3;
  constexpr double kBudgetS = 15.0 * 60.0;
  const auto t0 = Clock::now();
  std::size_t wc_good = 0;
  std::size_t wc_degenerated = 0;
  for (const char* variant : {"WC", "W_zcaC"}) {
    std::size_t degenerated = 0;
    std::string modes;
    std::string hq;
    double sn_max = 0.0;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      TrainConfig cfg;
      cfg.layer = LayerConfig::named(variant, 0);
      cfg.seed = seed;
      const TrainResult r = train(cfg);
      const std::size_t covered = r.metrics.empty() ? 0 : r.metrics.back().modes_covered;
      const double frac = r.metrics.empty() ? 0.0 : r.metrics.back().hq_fraction;
      if (r.outcome == RunOutcome::degenerated) ++degenerated;
      for (double s : r.max_disc_spectral_norm) sn_max = std::max(sn_max, s);
      if (std::string(variant) == "WC" && r.outcome == RunOutcome::completed &&
          covered >= kMinModes) {
        ++wc_good;
      }
      modes += fmt::format("{}{}", seed ? "," : "", covered);
      hq += fmt::format("{}{:.3f}", seed ? "," : "", frac);
    }
    if (std::string(variant) == "WC") wc_degenerated = degenerated;
    report += fmt::format("    {:<7} modes=[{}] hq=[{}] degenerated={}/{} max_sn={:.4f}\n",
                          variant, modes, hq, degenerated, kSeeds, sn_max);
  }
  const double elapsed = seconds_since(t0);
  return {wc_good >= kMinSeeds && wc_degenerated == 0 && elapsed < kBudgetS,
          fmt::format("WC >= {}/8 modes on {}/{} seeds (need {}), WC degenerated {}, "
                      "{:.0f}s (< {:.0f}s)",
                      kMinModes, wc_good, kSeeds, kMinSeeds, wc_degenerated, elapsed, kBudgetS)};
}

Outcome complexity_trend(std::string& report) {
  constexpr double kLo = 1.5;
  constexpr double kHi = 3.5;
  cli::BenchOptions opt;  // d in {16, 64, 256}, m = 1024
  const cli::BenchReport r = cli::run_bench(opt);
  std::istringstream lines(cli::format_bench_report(opt, r));
  for (std::string line; std::getline(lines, line);) report += "    " + line + "\n";
  return {r.chol_slope >= kLo && r.chol_slope <= kHi,
          fmt::format("cholesky slope {:.2f} in [{}, {}] (zca slope {:.2f}, report only)",
                      r.chol_slope, kLo, kHi, r.zca_slope)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wcnorm_acceptance_determinism";
  fs::remove_all(dir);
  TrainConfig cfg;
  cfg.layer = LayerConfig::named("cWC_sa", 0);
  cfg.n_iters = 300;
  cfg.log_every = 50;
  (void)cli::execute_run(cfg, dir / "a");
  (void)cli::execute_run(cfg, dir / "b");
  const bool metrics_equal = cli::read_text_file(dir / "a" / "metrics.csv") ==
                             cli::read_text_file(dir / "b" / "metrics.csv");
  const Checkpoint ck = Checkpoint::load(dir / "a" / "checkpoint.wcn");
  ck.save(dir / "resaved.wcn");
  const bool ckpt_bytes = cli::read_text_file(dir / "a" / "checkpoint.wcn") ==
                          cli::read_text_file(dir / "resaved.wcn");
  const bool ckpt_equal = Checkpoint::load(dir / "resaved.wcn") == ck;
  fs::remove_all(dir);
  return {metrics_equal && ckpt_bytes && ckpt_equal,
          fmt::format("metrics byte-identical={}, checkpoint save/load/save identical={}, "
                      "round-trip equal={}",
                      metrics_equal, ckpt_bytes, ckpt_equal)};
}

}  // namespace
}  // namespace wcnorm

int main() {
  using namespace wcnorm;
  std::string stability_report;
  std::string bench_report;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"whitening correctness", whitening_correctness},
      {"factorization identities", factorization_identities},
      {"gradient certification", gradient_certification},
      {"reduction identities", reduction_identities},
      {"capacity preservation", capacity_preservation},
      {"gradient routing", gradient_routing},
      {"zca/cholesky relation", zca_cholesky_relation},
      {"running statistics", running_statistics},
      {"toy stability study", [&] { return toy_stability(stability_report); }},
      {"complexity trend", [&] { return complexity_trend(bench_report); }},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << fmt::format("{} [{:>2}] {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1,
                             criteria[i].name, o.detail);
    if (i == 8) std::cout << stability_report;
    if (i == 9) std::cout << bench_report;
    std::cout.flush();
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
