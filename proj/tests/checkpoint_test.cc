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

#include <cmath>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wcnorm/errors.hpp"
#include "wcnorm/wclayers.hpp"

namespace wcnorm {
namespace {

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.iteration = 42;
  c.meta["variant"] = "WC";
  c.meta["note"] = "two words";
  c.put("g.w", testing::random_mat(3, 5, 1));
  c.put("g.b", Vec{0.1, -0.0, 1e-300, std::numeric_limits<double>::denorm_min()});
  c.put_scalar("t", 7.0);
  c.put("special", Vec{std::numeric_limits<double>::infinity(), -1.0 / 3.0});
  return c;
}

TEST(CheckpointTest, SerializeRoundTripIsBitExact) {
  const Checkpoint c = sample_checkpoint();
  const std::string bytes = c.serialize();
  const Checkpoint back = Checkpoint::deserialize(bytes);
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.serialize(), bytes);
  EXPECT_TRUE(std::signbit(back.get("g.b").data[1]));
}

TEST(CheckpointTest, FileSaveLoadSaveIsByteIdentical) {
  const auto dir = std::filesystem::temp_directory_path() / "wcnorm_ckpt_test";
  std::filesystem::create_directories(dir);
  const Checkpoint c = sample_checkpoint();
  c.save(dir / "a.wcn");
  Checkpoint::load(dir / "a.wcn").save(dir / "b.wcn");
  EXPECT_EQ(Checkpoint::load(dir / "a.wcn").serialize(),
            Checkpoint::load(dir / "b.wcn").serialize());
  EXPECT_EQ(std::filesystem::file_size(dir / "a.wcn"), std::filesystem::file_size(dir / "b.wcn"));
  std::filesystem::remove_all(dir);
}

TEST(CheckpointTest, ShapeCheckedReads) {
  const Checkpoint c = sample_checkpoint();
  EXPECT_EQ(c.get_mat("g.w", 3, 5), testing::random_mat(3, 5, 1));
  EXPECT_THROW(c.get_mat("g.w", 5, 3), CheckpointError);
  EXPECT_THROW(c.get_vec("g.b", 3), CheckpointError);
  EXPECT_THROW(c.get("missing"), CheckpointError);
  EXPECT_EQ(c.get_scalar("t"), 7.0);
}

TEST(CheckpointTest, CorruptInputIsRejected) {
  std::string bytes = sample_checkpoint().serialize();
  EXPECT_THROW(Checkpoint::deserialize("garbage"), CheckpointError);
  EXPECT_THROW(Checkpoint::deserialize(bytes.substr(0, bytes.size() - 3)), CheckpointError);
}

TEST(CheckpointTest, LayerStateRoundTrip) {
  const LayerConfig cfg = LayerConfig::named("cWC_sa", 3, 4);
  WCLayer layer(cfg, 3);
  std::vector<int> labels = {0, 1, 2, 3, 0, 1, 2, 3};
  (void)layer.forward(testing::correlated_batch(3, 8, 2), labels, ForwardMode::train);
  layer.freeze();
  Checkpoint c;
  save_params(c, "layer", layer.params());
  save_running(c, "layer", layer.running());
  const Checkpoint back = Checkpoint::deserialize(c.serialize());

  ColoringParams p = init_params(cfg, 99);
  load_params(back, "layer", p);
  EXPECT_EQ(p, layer.params());
  RunningStats rs = RunningStats::initial(3);
  load_running(back, "layer", rs);
  EXPECT_EQ(rs, layer.running());
}

TEST(CheckpointTest, LoadIntoMismatchedConfigIsRefused) {
  Checkpoint c;
  save_params(c, "layer", init_params(LayerConfig::named("WC", 3), 0));
  save_running(c, "layer", RunningStats::initial(3));
  ColoringParams p = init_params(LayerConfig::named("WC", 4), 0);
  EXPECT_THROW(load_params(c, "layer", p), CheckpointError);
  RunningStats rs = RunningStats::initial(4);
  EXPECT_THROW(load_running(c, "layer", rs), CheckpointError);
}

}  // namespace
}  // namespace wcnorm
