// Copyright 2026 The pacdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pacdiff/config.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include <gtest/gtest.h>

namespace pacdiff {
namespace {

RawConfig Minimal() {
  return ParseConfigText(
      "dataset.kind = gmm2d\n"
      "dataset.seed = 7\n"
      "dataset.n = 100\n"
      "rr.epsilon = 2\n",
      "test");
}

std::string ErrorKey(const RawConfig& raw) {
  try {
    ResolveConfig(raw);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

TEST(ConfigTest, MinimalConfigFillsDefaults) {
  const ExperimentConfig cfg = ResolveConfig(Minimal());
  EXPECT_EQ(cfg.dataset_kind, "gmm2d");
  EXPECT_EQ(cfg.dataset_seed, 7u);
  EXPECT_EQ(cfg.dataset_n, 100u);
  EXPECT_EQ(cfg.rr.epsilon, 2.0);
  EXPECT_EQ(cfg.rr.k_neighbors, 1u);
  EXPECT_EQ(cfg.pac_m, 200u);
  EXPECT_EQ(cfg.pac.nu, 0.5);
  EXPECT_EQ(cfg.pac.beta, 0.5);
  EXPECT_EQ(cfg.pac.gamma, 0.01);
  EXPECT_EQ(cfg.pac.r, 0.1);
  EXPECT_EQ(cfg.gradient_scale, 0.0);
  EXPECT_FALSE(cfg.base_step.has_value());
  EXPECT_EQ(cfg.resolved.size(), ConfigKeys().size());
}

TEST(ConfigTest, MissingRequiredKeyIsNamed) {
  for (const char* key :
       {"rr.epsilon", "dataset.kind", "dataset.seed", "dataset.n"}) {
    RawConfig raw = Minimal();
    raw.erase(key);
    EXPECT_EQ(ErrorKey(raw), key);
  }
}

TEST(ConfigTest, InvalidValueIsNamed) {
  RawConfig raw = Minimal();
  raw["score.lr"] = "fast";
  EXPECT_EQ(ErrorKey(raw), "score.lr");
  raw = Minimal();
  raw["dataset.kind"] = "faces";
  EXPECT_EQ(ErrorKey(raw), "dataset.kind");
  raw = Minimal();
  raw["sampler.label_mode"] = "2";
  EXPECT_EQ(ErrorKey(raw), "sampler.label_mode");
  raw = Minimal();
  raw["rr.epsilon"] = "-1";
  EXPECT_EQ(ErrorKey(raw), "rr.epsilon");
}

TEST(ConfigTest, UnknownKeyRejected) {
  EXPECT_THROW(ParseConfigText("rr.epsilon = 1\nrr.epsilonn = 2\n", "t"),
               ConfigError);
  RawConfig raw = Minimal();
  EXPECT_THROW(ApplyOverride(raw, "score.momentum=0.9"), ConfigError);
}

TEST(ConfigTest, DuplicateAndMalformedLinesRejected) {
  EXPECT_THROW(ParseConfigText("rr.k = 1\nrr.k = 2\n", "t"), ConfigError);
  EXPECT_THROW(ParseConfigText("rr.k 1\n", "t"), ConfigError);
  EXPECT_THROW(ParseConfigText(" = 1\n", "t"), ConfigError);
}

TEST(ConfigTest, CommentsAndBlankLines) {
  const RawConfig raw = ParseConfigText(
      "# header\n\n  rr.k = 5   # trailing\n\tscore.steps=10\n", "t");
  EXPECT_EQ(raw.at("rr.k"), "5");
  EXPECT_EQ(raw.at("score.steps"), "10");
  EXPECT_EQ(raw.size(), 2u);
}

TEST(ConfigTest, InfinityEpsilon) {
  RawConfig raw = Minimal();
  ApplyOverride(raw, "rr.epsilon=inf");
  EXPECT_TRUE(std::isinf(ResolveConfig(raw).rr.epsilon));
}

TEST(ConfigTest, OverridesReplaceFileValues) {
  RawConfig raw = Minimal();
  ApplyOverride(raw, "sampler.gradient_scale=10");
  ApplyOverride(raw, "score.layers=16:8:4");
  ApplyOverride(raw, "sampler.label_mode=1");
  const ExperimentConfig cfg = ResolveConfig(raw);
  EXPECT_EQ(cfg.gradient_scale, 10.0);
  EXPECT_EQ(cfg.score_net.hidden, (std::vector<std::size_t>{16, 8, 4}));
  EXPECT_EQ(cfg.TargetLabel(), 1);
  EXPECT_THROW(ApplyOverride(raw, "no-equals-sign"), ConfigError);
}

TEST(ConfigTest, AutoBaseStepScalesWithSmallestLevel) {
  ExperimentConfig cfg = ResolveConfig(Minimal());
  EXPECT_DOUBLE_EQ(cfg.ResolvedBaseStep(0.1), 0.05 * 0.01);
  RawConfig raw = Minimal();
  raw["sampler.base_step"] = "0.003";
  cfg = ResolveConfig(raw);
  EXPECT_DOUBLE_EQ(cfg.ResolvedBaseStep(0.1), 0.003);
}

TEST(ConfigTest, HashIgnoresOutDirButNotSettings) {
  RawConfig a = Minimal();
  RawConfig b = Minimal();
  b["out.dir"] = "elsewhere";
  const std::string ha = ConfigHash(ResolveConfig(a));
  EXPECT_EQ(ha.size(), 16u);
  EXPECT_EQ(ha, ConfigHash(ResolveConfig(b)));
  b["rr.k"] = "3";
  EXPECT_NE(ha, ConfigHash(ResolveConfig(b)));
}

TEST(ConfigTest, KeysAreUnique) {
  std::set<std::string> seen;
  for (const ConfigKey& k : ConfigKeys())
    EXPECT_TRUE(seen.insert(k.name).second) << k.name;
}

TEST(ConfigTest, ReadsFile) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("pacdiff_cfg_" + std::to_string(::getpid()) + ".cfg");
  std::ofstream(path) << "dataset.kind = glyphs\ndataset.seed = 1\n";
  const RawConfig raw = ReadConfigFile(path);
  EXPECT_EQ(raw.at("dataset.kind"), "glyphs");
  std::filesystem::remove(path);
  EXPECT_THROW(ReadConfigFile(path), ConfigError);
}

}  // namespace
}  // namespace pacdiff
