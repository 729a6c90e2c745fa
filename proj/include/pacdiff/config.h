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

// Experiment configuration: a flat "key = value" file with '#' comments.
//
// Every recognized key and its default is listed by ConfigKeys(). Keys
// without a default are required. Unknown keys are rejected.

#ifndef PACDIFF_CONFIG_H_
#define PACDIFF_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacdiff/classifier.h"
#include "pacdiff/datasets.h"
#include "pacdiff/pac_noise.h"
#include "pacdiff/score_model.h"

namespace pacdiff {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ConfigKey {
  std::string name;
  std::optional<std::string> default_value;  // nullopt: required
  std::string help;
};

const std::vector<ConfigKey>& ConfigKeys();

using RawConfig = std::map<std::string, std::string>;

// Parses "key = value" lines. Throws ConfigError for malformed lines,
// duplicate keys and unknown keys.
RawConfig ParseConfigText(const std::string& text, const std::string& source);
RawConfig ReadConfigFile(const std::filesystem::path& path);
// Applies a "key=value" override.
void ApplyOverride(RawConfig& raw, const std::string& assignment);

enum class LabelMode { kResample, kFixed0, kFixed1 };
enum class EmbedderMode { kMetric, kSeparate };

struct ClassifierSettings {
  ClassifierConfig net;
  TrainConfig train;
};

struct ExperimentConfig {
  RawConfig resolved;  // every key, defaults filled in

  std::string dataset_kind;  // "gmm2d" or "glyphs"
  std::uint64_t dataset_seed = 0;
  std::size_t dataset_n = 0;
  MixtureSpec mixture;
  std::size_t glyph_side = 8;

  std::size_t schedule_levels = 10;
  double delta_min = 0.01;
  std::optional<double> delta_max;  // nullopt: max pairwise distance / 2

  RrConfig rr;
  bool flip_direction = false;

  ScoreNetConfig score_net;
  TrainConfig score_train;

  ClassifierSettings guide;   // noise-conditioned, steers sampling
  ClassifierSettings metric;  // clean, labels samples for the privacy score
  EmbedderMode embedder = EmbedderMode::kSeparate;
  std::uint64_t embedder_seed = 0;

  std::size_t sampler_steps = 100;
  // alpha at the smallest level. nullopt: ratio * delta_L^2 with ratio 0.05
  // for points and 0.01 for images.
  std::optional<double> base_step;
  double gradient_scale = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t sampler_seed = 0;
  LabelMode label_mode = LabelMode::kResample;

  std::size_t pac_m = 200;
  PacParams pac;
  std::size_t pac_n_mc = 10000;
  std::size_t pac_n_gen = 200;
  std::string pac_reduction = "mean";
  BranchPolicy pac_branch = BranchPolicy::kAuto;
  std::uint64_t pac_seed = 0;

  std::filesystem::path out_dir;

  // Base Langevin step after resolving the "auto" default.
  double ResolvedBaseStep(double smallest_level) const;
  std::optional<int> TargetLabel() const;
};

// Fills defaults and validates. Throws ConfigError naming the first missing
// or invalid key.
ExperimentConfig ResolveConfig(const RawConfig& raw);

// FNV-1a over the sorted resolved "key=value" lines, as 16 hex digits.
std::string ConfigHash(const ExperimentConfig& cfg);

}  // namespace pacdiff

#endif  // PACDIFF_CONFIG_H_
