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

#include "pacdiff/pipeline.h"

#include <stdexcept>

#include "pacdiff/csv_io.h"
#include "pacdiff/kernels.h"
#include "pacdiff/rng.h"

namespace pacdiff {
namespace {

constexpr char kVersion[] = "0.1.0";

std::filesystem::path StageDir(const ExperimentConfig& cfg, const char* name) {
  return cfg.out_dir / name;
}

void WriteManifest(const std::filesystem::path& dir,
                   const ExperimentConfig& cfg, const std::string& stage,
                   const std::vector<std::pair<std::string, std::string>>&
                       extra = {}) {
  std::filesystem::create_directories(dir);
  CsvTable t{{"key", "value"}, {}};
  for (auto& [k, v] : ManifestRows(cfg, stage)) t.rows.push_back({k, v});
  for (auto& [k, v] : extra) t.rows.push_back({k, v});
  WriteCsvTable(dir / "manifest.csv", t);
}

ClassifierNet TrainClassifierRole(const LabeledDataset& data,
                                  const ClassifierSettings& s,
                                  const std::optional<NoiseSchedule>& sched) {
  return TrainClassifier(data, sched, s.net, s.train);
}

ClassifierNet TrainEmbedder(const ExperimentConfig& cfg,
                            const LabeledDataset& data) {
  ClassifierSettings s = cfg.metric;
  s.train.seed = cfg.embedder_seed;
  return TrainClassifierRole(data, s, std::nullopt);
}

}  // namespace

std::uint64_t RunSeed(std::uint64_t base, std::uint64_t run) {
  return Rng::ForStream(base, run).NextU64();
}

LabeledDataset MakeDataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.dataset_kind == "gmm2d")
    return MakeGmm2d(seed, cfg.dataset_n, cfg.mixture);
  return MakeGlyphs(seed, cfg.dataset_n, cfg.glyph_side);
}

NoiseSchedule MakeSchedule(const ExperimentConfig& cfg,
                           const LabeledDataset& data) {
  if (cfg.delta_max)
    return NoiseSchedule::Geometric(*cfg.delta_max, cfg.delta_min,
                                    cfg.schedule_levels);
  return DefaultSchedule(data, cfg.schedule_levels, cfg.delta_min);
}

SamplerConfig MakeSamplerConfig(const ExperimentConfig& cfg,
                                const NoiseSchedule& schedule) {
  SamplerConfig s;
  s.schedule = schedule;
  s.steps_per_level = cfg.sampler_steps;
  s.base_step = cfg.ResolvedBaseStep(schedule.smallest());
  s.gradient_scale = cfg.gradient_scale;
  s.target_label = cfg.TargetLabel();
  s.seed = cfg.sampler_seed;
  return s;
}

std::filesystem::path DatasetPath(const ExperimentConfig& cfg) {
  return StageDir(cfg, "data") /
         (cfg.dataset_kind == "gmm2d" ? "data.csv" : "images");
}

std::filesystem::path SamplesPath(const ExperimentConfig& cfg) {
  return StageDir(cfg, "samples") /
         (cfg.dataset_kind == "gmm2d" ? "samples.csv" : "images");
}

std::vector<std::pair<std::string, std::string>> ManifestRows(
    const ExperimentConfig& cfg, const std::string& stage) {
  std::vector<std::pair<std::string, std::string>> rows = {
      {"stage", stage},
      {"version", kVersion},
      {"config_hash", ConfigHash(cfg)},
      {"threads", std::to_string(kernels::MaxThreads())},
      {"seed.dataset", std::to_string(cfg.dataset_seed)},
      {"seed.score", std::to_string(cfg.score_train.seed)},
      {"seed.guide", std::to_string(cfg.guide.train.seed)},
      {"seed.metric", std::to_string(cfg.metric.train.seed)},
      {"seed.embedder", std::to_string(cfg.embedder_seed)},
      {"seed.sampler", std::to_string(cfg.sampler_seed)},
      {"seed.pac", std::to_string(cfg.pac_seed)},
      {"flag.recovery_direction",
       cfg.flip_direction ? "(x_tilde - anchor)/delta^2"
                      : "(anchor - x_tilde)/delta^2"},
      {"flag.guidance_covariance", "alpha_i*I"},
      {"flag.step_size", "base_step*delta_i^2/delta_L^2"},
      {"flag.score_output",
       cfg.score_net.scale_by_level ? "mlp/delta" : "mlp"},
      {"flag.branch_condition",
       "min_{1<=j<=j0}(lambda_j-lambda_{j+1}) > r*sqrt(d/c+2c)"},
      {"flag.embedder", cfg.embedder == EmbedderMode::kMetric
                            ? "metric-classifier-penultimate"
                            : "separate-clean-classifier-penultimate"},
      {"flag.pac_reduction", cfg.pac_reduction},
  };
  for (const auto& [k, v] : cfg.resolved) rows.emplace_back("config." + k, v);
  return rows;
}

TrainedModels TrainModels(const ExperimentConfig& cfg,
                          const LabeledDataset& data) {
  const NoiseSchedule schedule = MakeSchedule(cfg, data);
  TrainedModels m{TrainScore(data, schedule, cfg.rr, cfg.score_net,
                             cfg.score_train, cfg.flip_direction),
                  std::nullopt};
  if (cfg.gradient_scale != 0.0)
    m.guide = TrainClassifierRole(data, cfg.guide, schedule);
  return m;
}

SampleBatch GenerateSamples(const ExperimentConfig& cfg,
                            const TrainedModels& models, std::size_t n) {
  const SamplerConfig sc = MakeSamplerConfig(cfg, models.score.schedule());
  const NetScore score(models.score);
  const ClassifierNet* guide = models.guide ? &*models.guide : nullptr;
  return LangevinSample(score, guide, sc, n, models.score.sample_dim());
}

std::vector<double> RunMechanism(const ExperimentConfig& cfg,
                                 std::uint64_t run) {
  const LabeledDataset data = MakeDataset(cfg, RunSeed(cfg.dataset_seed, run));
  const TrainedModels models = TrainModels(cfg, data);
  const SampleBatch batch = GenerateSamples(cfg, models, cfg.pac_n_gen);
  std::vector<double> mean(batch.samples.cols(), 0.0);
  for (std::size_t r = 0; r < batch.samples.rows(); ++r)
    for (std::size_t c = 0; c < mean.size(); ++c)
      mean[c] += batch.samples.at(r, c);
  for (double& v : mean) v /= static_cast<double>(batch.samples.rows());
  return mean;
}

void StageGenData(const ExperimentConfig& cfg) {
  const LabeledDataset data = MakeDataset(cfg, cfg.dataset_seed);
  std::filesystem::create_directories(StageDir(cfg, "data"));
  SaveDataset(data, DatasetPath(cfg));
  WriteManifest(StageDir(cfg, "data"), cfg, "gen-data",
                {{"output", DatasetPath(cfg).filename().string()},
                 {"n", std::to_string(data.size())}});
}

void StageTrainScore(const ExperimentConfig& cfg) {
  const LabeledDataset data = LoadDataset(DatasetPath(cfg));
  const NoiseSchedule schedule = MakeSchedule(cfg, data);
  std::vector<double> losses;
  const ScoreNet net = TrainScore(data, schedule, cfg.rr, cfg.score_net,
                                  cfg.score_train, cfg.flip_direction, &losses);
  const auto dir = StageDir(cfg, "score");
  net.Save(dir);
  WriteLossLog(dir / "losses.csv", losses);
  WriteManifest(dir, cfg, "train-score",
                {{"final_loss", FormatDouble(losses.back())},
                 {"delta_max", FormatDouble(schedule[0])}});
}

void StageTrainClassifiers(const ExperimentConfig& cfg) {
  const LabeledDataset data = LoadDataset(DatasetPath(cfg));
  const NoiseSchedule schedule = MakeSchedule(cfg, data);
  const auto dir = StageDir(cfg, "classifiers");
  const ClassifierNet guide =
      TrainClassifierRole(data, cfg.guide, schedule);
  guide.Save(dir / "guide");
  const ClassifierNet metric =
      TrainClassifierRole(data, cfg.metric, std::nullopt);
  metric.Save(dir / "metric");
  std::vector<std::pair<std::string, std::string>> extra = {
      {"metric_train_accuracy", FormatDouble(Accuracy(metric, data))},
      {"guide_accuracy_smallest_level",
       FormatDouble(NoisyAccuracy(guide, data, schedule.size() - 1,
                                  cfg.guide.train.seed))}};
  if (cfg.embedder == EmbedderMode::kSeparate) {
    const ClassifierNet embedder = TrainEmbedder(cfg, data);
    embedder.Save(dir / "embedder");
    extra.emplace_back("embedder_train_accuracy",
                       FormatDouble(Accuracy(embedder, data)));
  }
  WriteManifest(dir, cfg, "train-classifier", extra);
}

void StageSample(const ExperimentConfig& cfg) {
  const LabeledDataset data = LoadDataset(DatasetPath(cfg));
  TrainedModels models{ScoreNet::Load(StageDir(cfg, "score")), std::nullopt};
  if (cfg.gradient_scale != 0.0)
    models.guide =
        ClassifierNet::Load(StageDir(cfg, "classifiers") / "guide");
  const SampleBatch batch = GenerateSamples(cfg, models, cfg.n_samples);
  std::filesystem::create_directories(StageDir(cfg, "samples"));
  SaveSamples(batch, data.sample_shape, SamplesPath(cfg));
  WriteManifest(StageDir(cfg, "samples"), cfg, "sample",
                {{"n", std::to_string(batch.samples.rows())},
                 {"base_step",
                  FormatDouble(cfg.ResolvedBaseStep(
                      models.score.schedule().smallest()))}});
}

PrivacyReport StagePrivacyScore(const ExperimentConfig& cfg) {
  const LabeledDataset data = LoadDataset(DatasetPath(cfg));
  const SampleBatch batch = LoadSamples(SamplesPath(cfg));
  const auto cdir = StageDir(cfg, "classifiers");
  const ClassifierNet metric = ClassifierNet::Load(cdir / "metric");
  const ClassifierNet embedder = cfg.embedder == EmbedderMode::kMetric
                                     ? metric
                                     : ClassifierNet::Load(cdir / "embedder");
  PrivacyReport report =
      PrivacyScore(batch.samples, data.samples, embedder, metric);
  if (cfg.embedder == EmbedderMode::kSeparate)
    report.embedder_id = "separate-" + report.embedder_id;
  const double ffd = FeatureFrechetDistance(batch.samples, data.samples,
                                            ClassifierFeatures(embedder));
  const auto dir = StageDir(cfg, "privacy");
  std::filesystem::create_directories(dir);
  WritePrivacyReport(dir / "privacy_report.csv", report);
  WriteMetricSummary(dir / "summary.csv", report, ffd);
  WriteAuditImages(dir / "audits", report, batch.samples, data.samples,
                   data.sample_shape, 16);
  WriteManifest(dir, cfg, "privacy-score",
                {{"score", FormatDouble(report.score)},
                 {"gradient_scale", FormatDouble(cfg.gradient_scale)}});
  return report;
}

double StageFfd(const ExperimentConfig& cfg) {
  const LabeledDataset data = LoadDataset(DatasetPath(cfg));
  const SampleBatch batch = LoadSamples(SamplesPath(cfg));
  const auto cdir = StageDir(cfg, "classifiers");
  const ClassifierNet embedder = ClassifierNet::Load(
      cdir / (cfg.embedder == EmbedderMode::kMetric ? "metric" : "embedder"));
  const double ffd = FeatureFrechetDistance(batch.samples, data.samples,
                                            ClassifierFeatures(embedder));
  const auto dir = StageDir(cfg, "ffd");
  std::filesystem::create_directories(dir);
  CsvTable t{{"ffd", "n_generated", "n_reference", "feature_dim"}, {}};
  t.rows.push_back({FormatDouble(ffd), std::to_string(batch.samples.rows()),
                    std::to_string(data.size()),
                    std::to_string(embedder.feature_dim())});
  WriteCsvTable(dir / "ffd.csv", t);
  WriteManifest(dir, cfg, "ffd");
  return ffd;
}

PacNoiseResult StagePacNoise(const ExperimentConfig& cfg) {
  const Tensor outputs = CollectOutputs(
      [&cfg](std::uint64_t run) { return RunMechanism(cfg, run); },
      cfg.pac_m);
  PacNoiseResult res = DetermineNoise(outputs, cfg.pac, cfg.pac_branch);
  Rng rng = Rng::ForStream(cfg.pac_seed, 0);
  res.e_norm = ExpectedNorm(res.sigma_b, cfg.pac_n_mc, rng);
  const auto dir = StageDir(cfg, "pac");
  SavePacResult(dir, res, outputs);
  WriteManifest(dir, cfg, "pac-noise",
                {{"branch", BranchName(res.branch)},
                 {"trace_sigma_b", FormatDouble(linalg::Trace(res.sigma_b))}});
  return res;
}

void StagePipeline(const ExperimentConfig& cfg, bool include_pac) {
  RunStage("gen-data", [&] { StageGenData(cfg); });
  RunStage("train-score", [&] { StageTrainScore(cfg); });
  RunStage("train-classifier", [&] { StageTrainClassifiers(cfg); });
  RunStage("sample", [&] { StageSample(cfg); });
  RunStage("privacy-score", [&] { StagePrivacyScore(cfg); });
  RunStage("ffd", [&] { StageFfd(cfg); });
  if (include_pac) RunStage("pac-noise", [&] { StagePacNoise(cfg); });
}

void RunStage(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace pacdiff
