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

// Subcommands of the wcnorm tool. Each returns the process exit code.

#ifndef WCNORM_CLI_COMMANDS_HPP_
#define WCNORM_CLI_COMMANDS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wcnorm/gradcheck.hpp"

namespace wcnorm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadConfig = 2;

// WCNORM_THREADS, at least 1; 1 when unset or unparsable.
std::size_t thread_cap();

struct GradcheckOptions {
  std::optional<std::string> variant;  // all certified variants when empty
  std::size_t d = 4;
  std::size_t m = 16;
  std::size_t n_classes = 5;
  double tolerance = kDefaultGradTolerance;
  std::uint64_t seed = 0;
};
int cmd_gradcheck(const GradcheckOptions& opt, std::ostream& out);

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;  // default runs/<dataset>-<variant>-seed<N>
};
int cmd_train(const TrainOptions& opt, std::ostream& out, std::ostream& err);

struct AblateOptions {
  std::filesystem::path config;
  std::filesystem::path out = "runs/ablate";
  std::size_t threads = 1;
};

struct AblateRow {
  std::string variant;
  std::vector<double> modes;  // per seed
  std::vector<double> hq;
  std::size_t degenerated = 0;
  std::size_t runs = 0;
};
int cmd_ablate(const AblateOptions& opt, std::ostream& out, std::ostream& err);
// The summary table printed by cmd_ablate.
std::string format_ablate_table(const std::vector<AblateRow>& rows);

struct BenchOptions {
  std::vector<std::size_t> sizes = {16, 64, 256};
  std::size_t m = 1024;
  std::size_t repeat = 5;
  std::uint64_t seed = 0;
};

struct BenchRow {
  std::size_t d = 0;
  double chol_fwd_ms = 0.0;
  double chol_fwd_bwd_ms = 0.0;
  double zca_fwd_ms = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double chol_slope = 0.0;  // least-squares slope of log time against log d
  double zca_slope = 0.0;
};

// Median over `repeat` timed runs after one untimed warmup run.
BenchReport run_bench(const BenchOptions& opt);
// The table printed by cmd_bench.
std::string format_bench_report(const BenchOptions& opt, const BenchReport& report);
int cmd_bench(const BenchOptions& opt, std::ostream& out);

}  // namespace wcnorm::cli

#endif  // WCNORM_CLI_COMMANDS_HPP_
