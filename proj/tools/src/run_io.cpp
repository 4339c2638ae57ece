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

#include "wcnorm_cli/run_io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "wcnorm/errors.hpp"
#include "wcnorm/version.hpp"

namespace wcnorm::cli {
namespace {

Json manifest_json(const TrainConfig& cfg, const std::string& started, const RunSummary& s) {
  Json j;
  j["tool"] = "wcnorm";
  j["version"] = std::string(kVersion);
  j["seed"] = cfg.seed;
  j["config"] = to_json(cfg);
  j["started_at"] = started;
  j["finished_at"] = utc_timestamp();
  j["outcome"] = s.outcome;
  j["degenerated_at"] = s.degenerated_at ? Json(*s.degenerated_at) : Json(nullptr);
  j["message"] = s.message;
  j["summary"] = {
      {"modes_covered", s.modes_covered},
      {"n_modes", s.n_modes},
      {"hq_fraction", s.hq_fraction},
  };
  return j;
}

}  // namespace

std::string format_metrics_csv(std::span<const MetricsRecord> records) {
  std::string out;
  out += kMetricsHeader;
  out += '\n';
  out += kMetricsColumns;
  out += '\n';
  for (const MetricsRecord& r : records) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.iter, r.gen_loss, r.disc_loss,
                       r.modes_covered, r.hq_fraction, r.whitened_cov_dev, r.wallclock_ms);
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

RunSummary execute_run(const TrainConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string started = utc_timestamp();
  RunSummary s;
  try {
    const TrainResult result = train(cfg);
    s.outcome = std::string(to_string(result.outcome));
    s.n_modes = result.n_modes;
    s.degenerated_at = result.degenerated_at;
    s.message = result.degeneration_reason;
    if (!result.metrics.empty()) {
      s.modes_covered = result.metrics.back().modes_covered;
      s.hq_fraction = result.metrics.back().hq_fraction;
    }
    write_text_file(dir / "metrics.csv", format_metrics_csv(result.metrics));
    result.checkpoint.save(dir / "checkpoint.wcn");
  } catch (const std::exception& e) {
    s.outcome = "error";
    s.message = e.what();
    write_text_file(dir / "manifest.json", manifest_json(cfg, started, s).dump(2) + "\n");
    throw;
  }
  write_text_file(dir / "manifest.json", manifest_json(cfg, started, s).dump(2) + "\n");
  return s;
}

}  // namespace wcnorm::cli
