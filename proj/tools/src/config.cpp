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

#include "wcnorm_cli/config.hpp"

#include <fstream>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm::cli {
namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Reads keys of one JSON object and rejects the ones never asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  std::string path(const std::string& key) const { return join_path(path_, key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void size(const std::string& key, std::size_t& out, std::size_t min = 0) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(path(key), "expected a non-negative integer");
    const auto x = v.get<std::uint64_t>();
    if (x < min) throw ConfigError(path(key), fmt::format("must be at least {}", min));
    out = static_cast<std::size_t>(x);
  }

  void u64(const std::string& key, std::uint64_t& out) {
    std::size_t tmp = static_cast<std::size_t>(out);
    size(key, tmp);
    out = tmp;
  }

  void number(const std::string& key, double& out, double lo, double hi) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi)) {
      throw ConfigError(path(key), fmt::format("{} outside [{}, {}]", x, lo, hi));
    }
    out = x;
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    out = v.get<std::string>();
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(path(item.key()), "unknown key");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_layer(const Json& j, const std::string& path, LayerConfig& layer) {
  ObjectReader r(j, path);
  std::string variant;
  r.string("variant", variant);
  std::string norm;
  std::string color;
  std::string cond;
  r.string("norm", norm);
  r.string("color", color);
  r.string("cond", cond);
  const bool explicit_modes = !norm.empty() || !color.empty() || !cond.empty();
  if (!variant.empty() && explicit_modes) {
    throw ConfigError(r.path("variant"), "give either a variant name or norm/color/cond");
  }
  try {
    if (!variant.empty()) {
      layer = LayerConfig::named(variant, 0);
    } else if (explicit_modes) {
      if (!norm.empty()) layer.norm = parse_norm_mode(norm);
      if (!color.empty()) layer.color = parse_color_mode(color);
      if (!cond.empty()) layer.cond = parse_cond_mode(cond);
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError(r.path(variant.empty() ? "norm" : "variant"), e.what());
  }
  r.number("eps", layer.eps, 0.0, 1.0);
  r.number("momentum", layer.momentum, std::numeric_limits<double>::min(), 1.0);
  r.size("dict_size", layer.dict_size);
  r.finish();
}

}  // namespace

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string(), fmt::format("malformed JSON: {}", e.what()));
  }
}

TrainConfig parse_train_config(const Json& j) {
  TrainConfig cfg;
  ObjectReader r(j, "");
  r.string("dataset", cfg.dataset);
  r.u64("seed", cfg.seed);
  if (r.has("layer")) parse_layer(r.raw("layer"), "layer", cfg.layer);
  if (r.has("model")) {
    ObjectReader m(r.raw("model"), "model");
    m.size("latent_dim", cfg.latent_dim, 1);
    m.size("gen_width", cfg.gen_width, 1);
    m.size("gen_hidden_layers", cfg.gen_hidden_layers, 1);
    m.size("disc_width", cfg.disc_width, 1);
    m.size("disc_hidden_layers", cfg.disc_hidden_layers, 1);
    m.number("output_scale", cfg.output_scale, 1e-6, 1e6);
    m.boolean("spectral_norm", cfg.spectral_norm);
    m.size("power_iterations", cfg.power_iterations, 1);
    m.finish();
  }
  if (r.has("train")) {
    ObjectReader t(r.raw("train"), "train");
    t.size("n_iters", cfg.n_iters);
    t.size("batch_size", cfg.batch_size, 2);
    t.size("disc_batch_size", cfg.disc_batch_size, 1);
    t.number("lr_gen", cfg.lr_gen, 1e-12, 1.0);
    t.number("lr_disc", cfg.lr_disc, 1e-12, 1.0);
    t.boolean("lr_decay", cfg.lr_decay);
    t.number("beta1", cfg.beta1, 0.0, 0.999999);
    t.number("beta2", cfg.beta2, 0.0, 0.999999);
    t.size("disc_steps", cfg.disc_steps, 1);
    t.size("log_every", cfg.log_every, 1);
    t.size("eval_samples", cfg.eval_samples, 1);
    t.size("dataset_size", cfg.dataset_size, 1);
    t.boolean("log_wallclock", cfg.log_wallclock);
    t.finish();
  }
  r.finish();
  try {
    cfg.validate();
  } catch (const UnknownDataset& e) {
    throw ConfigError("dataset", e.what());
  } catch (const InvalidParameter& e) {
    throw ConfigError("layer", e.what());
  }
  return cfg;
}

Json to_json(const TrainConfig& cfg) {
  Json layer;
  if (const auto name = variant_name(cfg.layer)) {
    layer["variant"] = std::string(*name);
  } else {
    layer["norm"] = std::string(to_string(cfg.layer.norm));
    layer["color"] = std::string(to_string(cfg.layer.color));
    layer["cond"] = std::string(to_string(cfg.layer.cond));
  }
  layer["eps"] = cfg.layer.eps;
  layer["momentum"] = cfg.layer.momentum;
  layer["dict_size"] = cfg.layer.dict_size;

  Json j;
  j["dataset"] = cfg.dataset;
  j["seed"] = cfg.seed;
  j["layer"] = layer;
  j["model"] = {
      {"latent_dim", cfg.latent_dim},
      {"gen_width", cfg.gen_width},
      {"gen_hidden_layers", cfg.gen_hidden_layers},
      {"disc_width", cfg.disc_width},
      {"disc_hidden_layers", cfg.disc_hidden_layers},
      {"output_scale", cfg.output_scale},
      {"spectral_norm", cfg.spectral_norm},
      {"power_iterations", cfg.power_iterations},
  };
  j["train"] = {
      {"n_iters", cfg.n_iters},
      {"batch_size", cfg.batch_size},
      {"disc_batch_size", cfg.disc_batch_size},
      {"lr_gen", cfg.lr_gen},
      {"lr_disc", cfg.lr_disc},
      {"lr_decay", cfg.lr_decay},
      {"beta1", cfg.beta1},
      {"beta2", cfg.beta2},
      {"disc_steps", cfg.disc_steps},
      {"log_every", cfg.log_every},
      {"eval_samples", cfg.eval_samples},
      {"dataset_size", cfg.dataset_size},
      {"log_wallclock", cfg.log_wallclock},
  };
  return j;
}

AblateConfig parse_ablate_config(const Json& j) {
  AblateConfig cfg;
  ObjectReader r(j, "");
  if (r.has("base")) {
    try {
      cfg.base = parse_train_config(r.raw("base"));
    } catch (const ConfigError& e) {
      throw ConfigError(e.path() == "<root>" ? "base" : "base." + e.path(), e.message());
    }
  }
  if (!r.has("variants")) throw ConfigError("variants", "missing list of layer variants");
  const Json& variants = r.raw("variants");
  if (!variants.is_array() || variants.empty()) {
    throw ConfigError("variants", "expected a non-empty array of variant names");
  }
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const std::string path = fmt::format("variants[{}]", i);
    if (!variants[i].is_string()) throw ConfigError(path, "expected a string");
    const std::string name = variants[i].get<std::string>();
    try {
      LayerConfig::named(name, 1, 2).validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError(path, e.what());
    }
    cfg.variants.push_back(name);
  }
  const bool has_seeds = r.has("seeds");
  const bool has_n = r.has("n_seeds");
  if (has_seeds && has_n) throw ConfigError("seeds", "give either seeds or n_seeds");
  if (has_seeds) {
    const Json& seeds = r.raw("seeds");
    if (!seeds.is_array() || seeds.empty()) {
      throw ConfigError("seeds", "expected a non-empty array of integers");
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!seeds[i].is_number_unsigned()) {
        throw ConfigError(fmt::format("seeds[{}]", i), "expected a non-negative integer");
      }
      cfg.seeds.push_back(seeds[i].get<std::uint64_t>());
    }
  } else {
    std::size_t n = 5;
    r.size("n_seeds", n, 1);
    for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(cfg.base.seed + i);
  }
  r.finish();
  return cfg;
}

}  // namespace wcnorm::cli
