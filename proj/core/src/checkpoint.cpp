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

#include "wcnorm/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "wcnorm/errors.hpp"

namespace wcnorm {
namespace {

constexpr std::string_view kMagic = "WCNORM-CHECKPOINT 1";

void append_le(std::string& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

bool valid_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
  }
  return true;
}

}  // namespace

void Checkpoint::put(const std::string& name, const Mat& m) {
  if (!valid_token(name)) throw CheckpointError(fmt::format("invalid tensor name '{}'", name));
  tensors_[name] = Tensor{{m.rows(), m.cols()}, Vec(m.values().begin(), m.values().end())};
}

void Checkpoint::put(const std::string& name, std::span<const double> v) {
  if (!valid_token(name)) throw CheckpointError(fmt::format("invalid tensor name '{}'", name));
  tensors_[name] = Tensor{{v.size()}, Vec(v.begin(), v.end())};
}

void Checkpoint::put_scalar(const std::string& name, double x) {
  if (!valid_token(name)) throw CheckpointError(fmt::format("invalid tensor name '{}'", name));
  tensors_[name] = Tensor{{}, Vec{x}};
}

const Tensor& Checkpoint::get(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw CheckpointError(fmt::format("checkpoint has no tensor '{}'", name));
  }
  return it->second;
}

Mat Checkpoint::get_mat(const std::string& name, std::size_t rows, std::size_t cols) const {
  const Tensor& t = get(name);
  if (t.shape != std::vector<std::size_t>{rows, cols}) {
    throw CheckpointError(fmt::format("tensor '{}' has shape [{}], expected [{}, {}]", name,
                                      fmt::join(t.shape, ", "), rows, cols));
  }
  return Mat(rows, cols, t.data);
}

Vec Checkpoint::get_vec(const std::string& name, std::size_t size) const {
  const Tensor& t = get(name);
  if (t.shape != std::vector<std::size_t>{size}) {
    throw CheckpointError(fmt::format("tensor '{}' has shape [{}], expected [{}]", name,
                                      fmt::join(t.shape, ", "), size));
  }
  return t.data;
}

double Checkpoint::get_scalar(const std::string& name) const {
  const Tensor& t = get(name);
  if (!t.shape.empty()) {
    throw CheckpointError(fmt::format("tensor '{}' has shape [{}], expected a scalar", name,
                                      fmt::join(t.shape, ", ")));
  }
  return t.data.at(0);
}

std::string Checkpoint::serialize() const {
  std::string index;
  index += kMagic;
  index += '\n';
  index += fmt::format("iteration {}\n", iteration);
  for (const auto& [key, value] : meta) {
    if (!valid_token(key) || value.find('\n') != std::string::npos) {
      throw CheckpointError(fmt::format("invalid meta entry '{}'", key));
    }
    index += fmt::format("meta {} {}\n", key, value);
  }
  std::size_t offset = 0;
  for (const auto& [name, t] : tensors_) {
    index += fmt::format("tensor {} {}", name, t.shape.size());
    for (std::size_t s : t.shape) index += fmt::format(" {}", s);
    index += fmt::format(" {} {}\n", offset, t.data.size());
    offset += t.data.size();
  }
  index += "end\n";
  std::string out = std::move(index);
  out.reserve(out.size() + 8 * offset);
  for (const auto& [name, t] : tensors_) {
    for (double x : t.data) append_le(out, x);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
  const auto end_marker = bytes.find("\nend\n");
  if (bytes.substr(0, kMagic.size()) != kMagic || end_marker == std::string_view::npos) {
    throw CheckpointError("not a wcnorm checkpoint");
  }
  const std::string_view binary = bytes.substr(end_marker + 5);
  std::istringstream index(std::string(bytes.substr(0, end_marker + 1)));
  std::string line;
  std::getline(index, line);  // magic

  Checkpoint ckpt;
  std::size_t expected_offset = 0;
  bool have_iteration = false;
  while (std::getline(index, line)) {
    std::istringstream fields(line);
    std::string kind;
    fields >> kind;
    if (kind == "iteration") {
      if (!(fields >> ckpt.iteration)) throw CheckpointError("malformed iteration line");
      have_iteration = true;
    } else if (kind == "meta") {
      std::string key;
      fields >> key;
      std::string value;
      std::getline(fields, value);
      if (key.empty() || value.empty() || value.front() != ' ') {
        throw CheckpointError(fmt::format("malformed meta line '{}'", line));
      }
      ckpt.meta[key] = value.substr(1);
    } else if (kind == "tensor") {
      std::string name;
      std::size_t rank = 0;
      if (!(fields >> name >> rank) || rank > 8) {
        throw CheckpointError(fmt::format("malformed tensor line '{}'", line));
      }
      Tensor t;
      t.shape.resize(rank);
      for (std::size_t& s : t.shape) {
        if (!(fields >> s)) throw CheckpointError(fmt::format("malformed tensor line '{}'", line));
      }
      std::size_t offset = 0;
      std::size_t count = 0;
      if (!(fields >> offset >> count) || count != element_count(t.shape) ||
          offset != expected_offset) {
        throw CheckpointError(fmt::format("inconsistent tensor entry '{}'", name));
      }
      if (8 * (offset + count) > binary.size()) {
        throw CheckpointError(fmt::format("tensor '{}' runs past the end of the file", name));
      }
      t.data.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        t.data[i] = read_le(binary.data() + 8 * (offset + i));
      }
      expected_offset = offset + count;
      if (!ckpt.tensors_.emplace(name, std::move(t)).second) {
        throw CheckpointError(fmt::format("duplicate tensor '{}'", name));
      }
    } else {
      throw CheckpointError(fmt::format("unexpected index line '{}'", line));
    }
  }
  if (!have_iteration) throw CheckpointError("checkpoint index has no iteration line");
  if (8 * expected_offset != binary.size()) {
    throw CheckpointError("binary section size does not match the index");
  }
  return ckpt;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(fmt::format("cannot open '{}' for writing", path.string()));
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(fmt::format("write to '{}' failed", path.string()));
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("cannot open '{}'", path.string()));
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

void save_running(Checkpoint& ckpt, const std::string& prefix, const RunningStats& rs) {
  ckpt.put(prefix + ".running.mu", rs.mu);
  ckpt.put(prefix + ".running.sigma", rs.sigma);
  ckpt.put_scalar(prefix + ".running.momentum", rs.momentum);
  ckpt.put_scalar(prefix + ".running.steps", static_cast<double>(rs.steps));
  if (rs.w) ckpt.put(prefix + ".running.w", *rs.w);
}

void load_running(const Checkpoint& ckpt, const std::string& prefix, RunningStats& rs) {
  const std::size_t d = rs.dim();
  Vec mu = ckpt.get_vec(prefix + ".running.mu", d);
  Mat sigma = ckpt.get_mat(prefix + ".running.sigma", d, d);
  const double momentum = ckpt.get_scalar(prefix + ".running.momentum");
  const auto steps = static_cast<std::uint64_t>(ckpt.get_scalar(prefix + ".running.steps"));
  const bool frozen = ckpt.contains(prefix + ".running.w");
  Mat w = frozen ? ckpt.get_mat(prefix + ".running.w", d, d) : Mat();
  rs.mu = std::move(mu);
  rs.sigma = std::move(sigma);
  rs.momentum = momentum;
  rs.steps = steps;
  if (frozen) {
    rs.w = std::move(w);
  } else {
    rs.w.reset();
  }
}

void save_params(Checkpoint& ckpt, const std::string& prefix, const ColoringParams& p) {
  for (const ConstParamGroup& g : p.groups()) {
    ckpt.put(fmt::format("{}.{}", prefix, g.name), Mat(g.rows, g.cols, Vec(g.values.begin(),
                                                                             g.values.end())));
  }
}

void load_params(const Checkpoint& ckpt, const std::string& prefix, ColoringParams& p) {
  ColoringParams out = p;
  for (ParamGroup g : out.groups()) {
    const Mat m = ckpt.get_mat(fmt::format("{}.{}", prefix, g.name), g.rows, g.cols);
    std::copy(m.values().begin(), m.values().end(), g.values.begin());
  }
  p = std::move(out);
}

}  // namespace wcnorm
