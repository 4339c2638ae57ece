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

#include "wcnorm_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "wcnorm/errors.hpp"
#include "wcnorm_cli/config.hpp"
#include "wcnorm_cli/run_io.hpp"

namespace wcnorm::cli {
namespace {

std::string run_label(const TrainConfig& cfg) {
  const auto name = variant_name(cfg.layer);
  return fmt::format("{}-{}-seed{}", cfg.dataset, name ? std::string(*name) : "custom", cfg.seed);
}

std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

}  // namespace

std::size_t thread_cap() {
  const char* env = std::getenv("WCNORM_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<std::size_t>(v);
}

int cmd_gradcheck(const GradcheckOptions& opt, std::ostream& out) {
  std::vector<std::string_view> variants;
  if (opt.variant) {
    variants.push_back(*opt.variant);
  } else {
    const auto all = gradcheck_variants();
    variants.assign(all.begin(), all.end());
  }
  const GradcheckShape shape{opt.d, opt.m, opt.n_classes, 0};
  bool all_passed = true;
  GradReport worst;
  worst.max_rel_error = -1.0;
  for (std::string_view v : variants) {
    const GradReport r = check_variant(v, shape, opt.seed, opt.tolerance);
    fmt::print(out, "{:<16} max_rel_error={:.3e} worst={}[{}] {}\n", v, r.max_rel_error,
               r.worst_group, r.worst_index, r.passed ? "PASS" : "FAIL");
    all_passed = all_passed && r.passed;
    if (r.max_rel_error > worst.max_rel_error) worst = r;
  }
  if (!all_passed) {
    fmt::print(out, "worst offender: {} {}[{}] max_rel_error={:.3e} > tolerance {:.1e}\n",
               worst.variant, worst.worst_group, worst.worst_index, worst.max_rel_error,
               opt.tolerance);
    return kExitFailure;
  }
  fmt::print(out, "all {} variants within {:.1e}\n", variants.size(), opt.tolerance);
  return kExitOk;
}

int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  TrainConfig cfg;
  try {
    cfg = parse_train_config(load_json(opt.config));
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitBadConfig;
  }
  if (opt.seed) cfg.seed = *opt.seed;
  const std::filesystem::path dir = opt.out ? *opt.out : "runs" / std::filesystem::path(run_label(cfg));
  try {
    const RunSummary s = execute_run(cfg, dir);
    fmt::print(out, "{} outcome={} modes_covered={}/{} hq_fraction={:.3f}{}\n", dir.string(),
               s.outcome, s.modes_covered, s.n_modes, s.hq_fraction,
               s.degenerated_at ? fmt::format(" degenerated_at={}", *s.degenerated_at) : "");
  } catch (const std::exception& e) {
    fmt::print(err, "run failed: {}\n", e.what());
    return kExitFailure;
  }
  return kExitOk;
}

std::string format_ablate_table(const std::vector<AblateRow>& rows) {
  std::string out = fmt::format("{:<16} {:>17} {:>19} {:>12}\n", "variant", "modes mean+-sd",
                                "hq_frac mean+-sd", "degenerated");
  for (const AblateRow& r : rows) {
    const auto [m_mean, m_sd] = mean_sd(r.modes);
    const auto [h_mean, h_sd] = mean_sd(r.hq);
    out += fmt::format("{:<16} {:>8.2f} +- {:<5.2f} {:>9.3f} +- {:<6.3f} {:>8}/{}\n", r.variant,
                       m_mean, m_sd, h_mean, h_sd, r.degenerated, r.runs);
  }
  return out;
}

int cmd_ablate(const AblateOptions& opt, std::ostream& out, std::ostream& err) {
  AblateConfig cfg;
  try {
    cfg = parse_ablate_config(load_json(opt.config));
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitBadConfig;
  }

  struct Job {
    std::size_t row;
    TrainConfig train;
    std::filesystem::path dir;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig t = cfg.base;
      const LayerConfig base_layer = t.layer;
      t.layer = LayerConfig::named(cfg.variants[v], 0);
      t.layer.eps = base_layer.eps;
      t.layer.momentum = base_layer.momentum;
      t.layer.dict_size = base_layer.dict_size;
      t.seed = seed;
      jobs.push_back({v, t, opt.out / cfg.variants[v] / fmt::format("seed{}", seed)});
    }
  }

  std::vector<RunSummary> results(jobs.size());
  std::vector<std::string> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex print_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = execute_run(jobs[i].train, jobs[i].dir);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
      std::lock_guard<std::mutex> lock(print_mutex);
      fmt::print(err, "[{}/{}] {} {}\n", i + 1, jobs.size(), jobs[i].dir.string(),
                 failures[i].empty() ? results[i].outcome : "error: " + failures[i]);
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(opt.threads, 1, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<AblateRow> rows(cfg.variants.size());
  for (std::size_t v = 0; v < rows.size(); ++v) rows[v].variant = cfg.variants[v];
  bool any_error = false;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!failures[i].empty()) {
      any_error = true;
      continue;
    }
    AblateRow& row = rows[jobs[i].row];
    ++row.runs;
    if (results[i].outcome == "degenerated") ++row.degenerated;
    row.modes.push_back(static_cast<double>(results[i].modes_covered));
    row.hq.push_back(results[i].hq_fraction);
  }
  const std::string table = format_ablate_table(rows);
  fmt::print(out, "{}", table);
  std::string csv = "variant,seed,outcome,modes_covered,hq_fraction\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    csv += fmt::format("{},{},{},{},{}\n", cfg.variants[jobs[i].row], jobs[i].train.seed,
                       failures[i].empty() ? results[i].outcome : "error",
                       results[i].modes_covered, results[i].hq_fraction);
  }
  std::filesystem::create_directories(opt.out);
  write_text_file(opt.out / "summary.csv", csv);
  write_text_file(opt.out / "summary.txt", table);
  return any_error ? kExitFailure : kExitOk;
}

}  // namespace wcnorm::cli
