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

// Run directories: manifest.json, metrics.csv and checkpoint.wcn.

#ifndef WCNORM_CLI_RUN_IO_HPP_
#define WCNORM_CLI_RUN_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "wcnorm/gan_trainer.hpp"
#include "wcnorm_cli/config.hpp"

namespace wcnorm::cli {

inline constexpr std::string_view kMetricsHeader = "# wcnorm metrics v1";
inline constexpr std::string_view kMetricsColumns =
    "iter,gen_loss,disc_loss,modes_covered,hq_fraction,whitened_cov_dev,wallclock_ms";

// Header comment, column line, one row per record. Doubles use the shortest
// representation that round-trips.
std::string format_metrics_csv(std::span<const MetricsRecord> records);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// ISO 8601 UTC time, second resolution.
std::string utc_timestamp();

struct RunSummary {
  std::string outcome;  // completed | degenerated | error
  std::size_t modes_covered = 0;
  std::size_t n_modes = 0;
  double hq_fraction = 0.0;
  std::optional<std::size_t> degenerated_at;
  std::string message;
};

// Trains and writes the run directory. Failures other than degeneration are
// recorded with outcome "error" and rethrown.
RunSummary execute_run(const TrainConfig& cfg, const std::filesystem::path& dir);

}  // namespace wcnorm::cli

#endif  // WCNORM_CLI_RUN_IO_HPP_
