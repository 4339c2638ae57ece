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

// JSON experiment configuration with strict schema checks. Every error
// names the offending path, e.g. "train.lr_gen".

#ifndef WCNORM_CLI_CONFIG_HPP_
#define WCNORM_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wcnorm/gan_trainer.hpp"

namespace wcnorm::cli {

using Json = nlohmann::ordered_json;

// Parses a file; ConfigError on unreadable files and malformed JSON.
Json load_json(const std::filesystem::path& path);

// {"dataset", "seed", "layer": {...}, "model": {...}, "train": {...}}; all
// keys optional, unknown keys rejected.
TrainConfig parse_train_config(const Json& j);
Json to_json(const TrainConfig& cfg);

struct AblateConfig {
  TrainConfig base;
  std::vector<std::string> variants;
  std::vector<std::uint64_t> seeds;
};

// {"base": <train config>, "variants": [...], "seeds": [...] | "n_seeds": n}.
// n_seeds counts up from base.seed.
AblateConfig parse_ablate_config(const Json& j);

}  // namespace wcnorm::cli

#endif  // WCNORM_CLI_CONFIG_HPP_
