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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "wcnorm/normstats.hpp"
#include "wcnorm/wclayers.hpp"
#include "wcnorm_cli/commands.hpp"

namespace wcnorm::cli {
namespace {

template <typename F>
double median_ms(std::size_t repeat, F&& f) {
  f();  // warmup, not timed
  std::vector<double> times;
  for (std::size_t r = 0; r < std::max<std::size_t>(repeat, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    times.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  return n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

double loglog_slope(const std::vector<BenchRow>& rows, double BenchRow::*field) {
  const double n = static_cast<double>(rows.size());
  if (rows.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const BenchRow& r : rows) {
    const double x = std::log(static_cast<double>(r.d));
    const double y = std::log(r.*field);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Keeps results observable so the timed work is not optimized away.
volatile double g_sink = 0.0;

}  // namespace

BenchReport run_bench(const BenchOptions& opt) {
  BenchReport report;
  for (std::size_t d : opt.sizes) {
    std::mt19937_64 rng(opt.seed + d);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat x(d, opt.m);
    for (double& v : x.values()) v = normal(rng);

    BenchRow row;
    row.d = d;
    row.chol_fwd_ms = median_ms(opt.repeat, [&] {
      const BatchStats bs = compute_batch_stats(x, kDefaultShrinkage);
      g_sink = g_sink + whiten(x, bs)(0, 0);
    });
    const LayerConfig cfg = LayerConfig::named("W-only", d);
    const ColoringParams params = init_params(cfg, 0);
    Mat y_bar(d, opt.m, 1.0);
    row.chol_fwd_bwd_ms = median_ms(opt.repeat, [&] {
      RunningStats rs = RunningStats::initial(d);
      LayerOutput out = wc_forward(x, {}, params, cfg, ForwardMode::train, rs);
      g_sink = g_sink + wc_backward(y_bar, out.cache, params).d_input(0, 0);
    });
    row.zca_fwd_ms = median_ms(opt.repeat, [&] {
      const Vec mu = row_means(x);
      const Mat sigma = shrink(empirical_covariance(x, mu), kDefaultShrinkage);
      g_sink = g_sink + matmul(zca_whitening_matrix(sigma), center_rows(x, mu))(0, 0);
    });
    report.rows.push_back(row);
  }
  report.chol_slope = loglog_slope(report.rows, &BenchRow::chol_fwd_ms);
  report.zca_slope = loglog_slope(report.rows, &BenchRow::zca_fwd_ms);
  return report;
}

std::string format_bench_report(const BenchOptions& opt, const BenchReport& r) {
  std::string out = fmt::format("whitening timings, m={}, median of {} (warmup excluded)\n",
                                opt.m, opt.repeat);
  out += fmt::format("{:>6} {:>14} {:>18} {:>13} {:>9}\n", "d", "chol_fwd_ms",
                     "chol_fwd_bwd_ms", "zca_fwd_ms", "zca/chol");
  for (const BenchRow& row : r.rows) {
    out += fmt::format("{:>6} {:>14.3f} {:>18.3f} {:>13.3f} {:>9.2f}\n", row.d, row.chol_fwd_ms,
                       row.chol_fwd_bwd_ms, row.zca_fwd_ms, row.zca_fwd_ms / row.chol_fwd_ms);
  }
  out += fmt::format("log-log slope vs d: cholesky {:.2f}, zca {:.2f}\n", r.chol_slope,
                     r.zca_slope);
  return out;
}

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  out << format_bench_report(opt, run_bench(opt));
  return kExitOk;
}

}  // namespace wcnorm::cli
