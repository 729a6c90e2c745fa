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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pacdiff {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool IsKnownKey(const std::string& key) {
  for (const auto& k : ConfigKeys())
    if (k.name == key) return true;
  return false;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  const std::string& Str(const std::string& key) const {
    auto it = raw_.find(key);
    if (it == raw_.end()) throw ConfigError(key, "required key is missing");
    return it->second;
  }

  double Double(const std::string& key) const {
    const std::string& s = Str(key);
    if (s == "inf" || s == "+inf") return HUGE_VAL;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() ||
        std::isnan(v))
      throw ConfigError(key, "expected a number, got '" + s + "'");
    return v;
  }

  double Positive(const std::string& key) const {
    const double v = Double(key);
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(key, "must be a positive finite number");
    return v;
  }

  std::uint64_t U64(const std::string& key) const {
    const std::string& s = Str(key);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError(key, "expected a non-negative integer, got '" + s +
                                 "'");
    return v;
  }

  std::size_t Count(const std::string& key) const {
    const std::uint64_t v = U64(key);
    if (v == 0) throw ConfigError(key, "must be >= 1");
    return static_cast<std::size_t>(v);
  }

  bool Bool(const std::string& key) const {
    const std::string& s = Str(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + s + "'");
  }

  std::vector<std::size_t> Sizes(const std::string& key) const {
    try {
      return ParseSizeList(Str(key));
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  }

  Activation Act(const std::string& key) const {
    try {
      return ParseActivation(Str(key));
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  }

 private:
  const RawConfig& raw_;
};

ClassifierSettings ReadClassifier(const Reader& r, const std::string& prefix) {
  ClassifierSettings s;
  s.net.hidden = r.Sizes(prefix + ".layers");
  s.net.activation = r.Act(prefix + ".activation");
  s.train.lr = r.Positive(prefix + ".lr");
  s.train.steps = r.Count(prefix + ".steps");
  s.train.batch = r.Count(prefix + ".batch");
  s.train.seed = r.U64(prefix + ".seed");
  return s;
}

}  // namespace

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = {
      {"dataset.kind", std::nullopt, "gmm2d or glyphs"},
      {"dataset.seed", std::nullopt, "data generator seed"},
      {"dataset.n", std::nullopt, "number of training items"},
      {"dataset.components", "2", "mixture components (even)"},
      {"dataset.radius", "2", "mixture center radius"},
      {"dataset.sigma", "0.5", "mixture component std"},
      {"dataset.side", "8", "glyph side length"},
      {"schedule.L", "10", "number of noise levels"},
      {"schedule.delta_min", "0.01", "smallest noise level"},
      {"schedule.delta_max", "auto", "largest level; auto = max dist / 2"},
      {"rr.epsilon", std::nullopt, "randomized response epsilon, or inf"},
      {"rr.k", "1", "randomized response candidate count"},
      {"rr.flip_direction", "false", "use the negated recovery direction"},
      {"score.layers", "64:64", "hidden sizes"},
      {"score.activation", "relu", "relu or tanh"},
      {"score.lr", "0.01", "SGD learning rate"},
      {"score.steps", "2000", "SGD steps"},
      {"score.batch", "64", "mini-batch size"},
      {"score.seed", "1", "initialization and batch seed"},
      {"score.scale_by_level", "true", "divide output by the noise level"},
      {"classifier.guide.layers", "32:16", "hidden sizes"},
      {"classifier.guide.activation", "relu", "relu or tanh"},
      {"classifier.guide.lr", "0.05", "SGD learning rate"},
      {"classifier.guide.steps", "1000", "SGD steps"},
      {"classifier.guide.batch", "64", "mini-batch size"},
      {"classifier.guide.seed", "2", "seed"},
      {"classifier.metric.layers", "32:16", "hidden sizes"},
      {"classifier.metric.activation", "relu", "relu or tanh"},
      {"classifier.metric.lr", "0.05", "SGD learning rate"},
      {"classifier.metric.steps", "1000", "SGD steps"},
      {"classifier.metric.batch", "64", "mini-batch size"},
      {"classifier.metric.seed", "3", "seed"},
      {"privacy.embedder", "separate",
       "metric (reuse the metric classifier) or separate"},
      {"privacy.embedder_seed", "4", "seed of the separate embedder"},
      {"sampler.T", "100", "Langevin steps per level"},
      {"sampler.base_step", "auto", "alpha_L; auto = 0.05 (points) or 0.01 (images) times delta_L^2"},
      {"sampler.gradient_scale", "0", "guidance scale k"},
      {"sampler.n_samples", "200", "number of chains"},
      {"sampler.seed", "5", "sampling seed"},
      {"sampler.label_mode", "resample", "resample, 0 or 1"},
      {"pac.m", "200", "mechanism runs"},
      {"pac.nu", "0.5", "nu"},
      {"pac.beta", "0.5", "beta"},
      {"pac.c", "0.01", "security parameter c"},
      {"pac.r", "0.1", "branch gap factor"},
      {"pac.gamma", "0.01", "confidence level (reported)"},
      {"pac.n_mc", "10000", "Monte Carlo draws for E||B||"},
      {"pac.reduction", "mean", "output reduction"},
      {"pac.n_gen", "200", "samples generated per run"},
      {"pac.branch", "auto", "auto, anisotropic or isotropic"},
      {"pac.seed", "6", "Monte Carlo seed for E||B||"},
      {"out.dir", "out", "artifact directory"},
  };
  return keys;
}

RawConfig ParseConfigText(const std::string& text, const std::string& source) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where, "expected 'key = value'");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (!IsKnownKey(key)) throw ConfigError(key, "unknown key (" + where + ")");
    if (!raw.emplace(key, value).second)
      throw ConfigError(key, "duplicate key (" + where + ")");
  }
  return raw;
}

RawConfig ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str(), path.string());
}

void ApplyOverride(RawConfig& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError(assignment, "override must be key=value");
  const std::string key = Trim(assignment.substr(0, eq));
  if (!IsKnownKey(key)) throw ConfigError(key, "unknown key (override)");
  raw[key] = Trim(assignment.substr(eq + 1));
}

double ExperimentConfig::ResolvedBaseStep(double smallest_level) const {
  if (base_step) return *base_step;
  const double ratio = dataset_kind == "glyphs" ? 0.01 : 0.05;
  return ratio * smallest_level * smallest_level;
}

std::optional<int> ExperimentConfig::TargetLabel() const {
  switch (label_mode) {
    case LabelMode::kFixed0:
      return 0;
    case LabelMode::kFixed1:
      return 1;
    case LabelMode::kResample:
      break;
  }
  return std::nullopt;
}

ExperimentConfig ResolveConfig(const RawConfig& raw) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : raw)
    if (!IsKnownKey(key)) throw ConfigError(key, "unknown key");
  cfg.resolved = raw;
  for (const auto& k : ConfigKeys())
    if (k.default_value) cfg.resolved.emplace(k.name, *k.default_value);
  const Reader r(cfg.resolved);

  cfg.dataset_kind = r.Str("dataset.kind");
  if (cfg.dataset_kind != "gmm2d" && cfg.dataset_kind != "glyphs")
    throw ConfigError("dataset.kind", "expected gmm2d or glyphs, got '" +
                                          cfg.dataset_kind + "'");
  cfg.dataset_seed = r.U64("dataset.seed");
  cfg.dataset_n = r.Count("dataset.n");
  cfg.mixture.components = r.Count("dataset.components");
  if (cfg.mixture.components % 2 != 0)
    throw ConfigError("dataset.components", "must be even");
  cfg.mixture.radius = r.Positive("dataset.radius");
  cfg.mixture.sigma = r.Positive("dataset.sigma");
  cfg.glyph_side = r.Count("dataset.side");
  if (cfg.glyph_side < 6) throw ConfigError("dataset.side", "must be >= 6");

  cfg.schedule_levels = r.Count("schedule.L");
  cfg.delta_min = r.Positive("schedule.delta_min");
  if (r.Str("schedule.delta_max") != "auto") {
    cfg.delta_max = r.Positive("schedule.delta_max");
    if (!(*cfg.delta_max > cfg.delta_min) && cfg.schedule_levels > 1)
      throw ConfigError("schedule.delta_max", "must exceed schedule.delta_min");
  }

  cfg.rr.epsilon = r.Double("rr.epsilon");
  if (!(cfg.rr.epsilon > 0.0))
    throw ConfigError("rr.epsilon", "must be > 0 (or inf)");
  cfg.rr.k_neighbors = r.Count("rr.k");
  cfg.flip_direction = r.Bool("rr.flip_direction");

  cfg.score_net.hidden = r.Sizes("score.layers");
  cfg.score_net.activation = r.Act("score.activation");
  cfg.score_net.scale_by_level = r.Bool("score.scale_by_level");
  cfg.score_train.lr = r.Positive("score.lr");
  cfg.score_train.steps = r.Count("score.steps");
  cfg.score_train.batch = r.Count("score.batch");
  cfg.score_train.seed = r.U64("score.seed");

  cfg.guide = ReadClassifier(r, "classifier.guide");
  cfg.metric = ReadClassifier(r, "classifier.metric");
  const std::string& emb = r.Str("privacy.embedder");
  if (emb == "metric") {
    cfg.embedder = EmbedderMode::kMetric;
  } else if (emb == "separate") {
    cfg.embedder = EmbedderMode::kSeparate;
  } else {
    throw ConfigError("privacy.embedder", "expected metric or separate");
  }
  cfg.embedder_seed = r.U64("privacy.embedder_seed");

  cfg.sampler_steps = r.Count("sampler.T");
  if (r.Str("sampler.base_step") != "auto")
    cfg.base_step = r.Positive("sampler.base_step");
  cfg.gradient_scale = r.Double("sampler.gradient_scale");
  if (!std::isfinite(cfg.gradient_scale) || cfg.gradient_scale < 0.0)
    throw ConfigError("sampler.gradient_scale", "must be finite and >= 0");
  cfg.n_samples = r.Count("sampler.n_samples");
  cfg.sampler_seed = r.U64("sampler.seed");
  const std::string& mode = r.Str("sampler.label_mode");
  if (mode == "resample") {
    cfg.label_mode = LabelMode::kResample;
  } else if (mode == "0") {
    cfg.label_mode = LabelMode::kFixed0;
  } else if (mode == "1") {
    cfg.label_mode = LabelMode::kFixed1;
  } else {
    throw ConfigError("sampler.label_mode", "expected resample, 0 or 1");
  }

  cfg.pac_m = r.Count("pac.m");
  if (cfg.pac_m < 2) throw ConfigError("pac.m", "must be >= 2");
  cfg.pac.nu = r.Positive("pac.nu");
  cfg.pac.beta = r.Positive("pac.beta");
  cfg.pac.c = r.Positive("pac.c");
  cfg.pac.r = r.Positive("pac.r");
  cfg.pac.gamma = r.Positive("pac.gamma");
  cfg.pac_n_mc = r.Count("pac.n_mc");
  if (cfg.pac_n_mc < 2) throw ConfigError("pac.n_mc", "must be >= 2");
  cfg.pac_reduction = r.Str("pac.reduction");
  if (cfg.pac_reduction != "mean")
    throw ConfigError("pac.reduction", "only 'mean' is supported");
  cfg.pac_n_gen = r.Count("pac.n_gen");
  try {
    cfg.pac_branch = ParseBranchPolicy(r.Str("pac.branch"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("pac.branch", e.what());
  }

  cfg.pac_seed = r.U64("pac.seed");

  cfg.out_dir = r.Str("out.dir");
  if (cfg.out_dir.empty()) throw ConfigError("out.dir", "must not be empty");
  return cfg;
}

std::string ConfigHash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, value] : cfg.resolved) {
    if (key == "out.dir") continue;  // where results go, not what they are
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pacdiff
