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

// Experiment stages. Each stage reads its inputs from and writes its outputs
// to a fixed layout under cfg.out_dir, and leaves a manifest.csv beside its
// outputs:
//
//   data/         data.csv (points) or images/ (glyphs)
//   score/        trained score network, losses.csv
//   classifiers/  guide/, metric/, embedder/
//   samples/      samples.csv (points) or images/ (glyphs)
//   privacy/      privacy_report.csv, summary.csv, audits/
//   ffd/          ffd.csv
//   pac/          pac_result.csv, sigma_b.csv, outputs.csv

#ifndef PACDIFF_PIPELINE_H_
#define PACDIFF_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pacdiff/classifier.h"
#include "pacdiff/config.h"
#include "pacdiff/datasets.h"
#include "pacdiff/pac_noise.h"
#include "pacdiff/privacy_metrics.h"
#include "pacdiff/sampler.h"
#include "pacdiff/score_model.h"

namespace pacdiff {

LabeledDataset MakeDataset(const ExperimentConfig& cfg, std::uint64_t seed);
NoiseSchedule MakeSchedule(const ExperimentConfig& cfg,
                           const LabeledDataset& data);
SamplerConfig MakeSamplerConfig(const ExperimentConfig& cfg,
                                const NoiseSchedule& schedule);

std::filesystem::path DatasetPath(const ExperimentConfig& cfg);
std::filesystem::path SamplesPath(const ExperimentConfig& cfg);

// Trained models of one pipeline execution, in memory.
struct TrainedModels {
  ScoreNet score;
  std::optional<ClassifierNet> guide;  // present when gradient_scale > 0
};

TrainedModels TrainModels(const ExperimentConfig& cfg,
                          const LabeledDataset& data);
SampleBatch GenerateSamples(const ExperimentConfig& cfg,
                            const TrainedModels& models, std::size_t n);

// The end-to-end mechanism used for noise calibration: run k draws a fresh
// dataset with a run-indexed seed, trains, samples pac.n_gen items with the
// fixed sampler seed and returns their mean.
std::vector<double> RunMechanism(const ExperimentConfig& cfg,
                                 std::uint64_t run);
std::uint64_t RunSeed(std::uint64_t base, std::uint64_t run);

// A failure inside a named stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Runs body, rethrowing any std::exception as a StageError for `name`.
void RunStage(const std::string& name, const std::function<void()>& body);

// Stage entry points.
void StageGenData(const ExperimentConfig& cfg);
void StageTrainScore(const ExperimentConfig& cfg);
void StageTrainClassifiers(const ExperimentConfig& cfg);
void StageSample(const ExperimentConfig& cfg);
PrivacyReport StagePrivacyScore(const ExperimentConfig& cfg);
double StageFfd(const ExperimentConfig& cfg);
PacNoiseResult StagePacNoise(const ExperimentConfig& cfg);
// Every stage in order; pac-noise only when include_pac.
void StagePipeline(const ExperimentConfig& cfg, bool include_pac);

// Key/value rows common to every manifest: config hash, seeds, the
// convention flags and every resolved config key.
std::vector<std::pair<std::string, std::string>> ManifestRows(
    const ExperimentConfig& cfg, const std::string& stage);

}  // namespace pacdiff

#endif  // PACDIFF_PIPELINE_H_
