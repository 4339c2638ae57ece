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

// Checkpoint container: named double tensors in a little-endian binary
// section behind a plain-text index.
//
//   WCNORM-CHECKPOINT 1
//   iteration <n>
//   meta <key> <value>            (zero or more)
//   tensor <name> <rank> <dims...> <offset> <count>
//   end
//   <count doubles per tensor, in index order>

#ifndef WCNORM_CHECKPOINT_HPP_
#define WCNORM_CHECKPOINT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wcnorm/linalg.hpp"
#include "wcnorm/normstats.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {

struct Tensor {
  std::vector<std::size_t> shape;
  Vec data;

  bool operator==(const Tensor&) const = default;
};

class Checkpoint {
 public:
  std::uint64_t iteration = 0;
  // Keys must not contain whitespace; values must not contain line breaks.
  std::map<std::string, std::string> meta;

  void put(const std::string& name, const Mat& m);
  void put(const std::string& name, std::span<const double> v);
  void put_scalar(const std::string& name, double x);

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const Tensor& get(const std::string& name) const;  // CheckpointError if missing
  // Shape-checked reads; CheckpointError names the tensor on mismatch.
  Mat get_mat(const std::string& name, std::size_t rows, std::size_t cols) const;
  Vec get_vec(const std::string& name, std::size_t size) const;
  double get_scalar(const std::string& name) const;

  const std::map<std::string, Tensor>& tensors() const noexcept { return tensors_; }

  std::string serialize() const;
  static Checkpoint deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  bool operator==(const Checkpoint&) const = default;

 private:
  std::map<std::string, Tensor> tensors_;
};

// Layer state under a name prefix: "<prefix>.gamma", "<prefix>.running.mu", ...
void save_running(Checkpoint& ckpt, const std::string& prefix, const RunningStats& rs);
// Reads into `rs`, whose dimension fixes the expected shapes.
void load_running(const Checkpoint& ckpt, const std::string& prefix, RunningStats& rs);
void save_params(Checkpoint& ckpt, const std::string& prefix, const ColoringParams& p);
// Groups present in `p` fix the expected shapes.
void load_params(const Checkpoint& ckpt, const std::string& prefix, ColoringParams& p);

}  // namespace wcnorm

#endif  // WCNORM_CHECKPOINT_HPP_
