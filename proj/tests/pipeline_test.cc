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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "pacdiff/csv_io.h"

namespace pacdiff {
namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = std::filesystem::temp_directory_path() /
            ("pacdiff_pipe_" + std::to_string(::getpid()));
    raw_ = ParseConfigText(
        "dataset.kind = gmm2d\n"
        "dataset.seed = 3\n"
        "dataset.n = 120\n"
        "schedule.L = 4\n"
        "schedule.delta_min = 0.1\n"
        "rr.epsilon = 2\n"
        "rr.k = 3\n"
        "score.layers = 16:16\n"
        "score.steps = 60\n"
        "classifier.guide.steps = 60\n"
        "classifier.metric.steps = 60\n"
        "sampler.T = 5\n"
        "sampler.gradient_scale = 5\n"
        "sampler.n_samples = 40\n"
        "pac.m = 3\n"
        "pac.n_gen = 10\n"
        "pac.n_mc = 100\n",
        "test");
  }
  void TearDown() override { std::filesystem::remove_all(root_); }

  ExperimentConfig Config(const std::string& name, RawConfig raw) {
    raw["out.dir"] = (root_ / name).string();
    return ResolveConfig(raw);
  }

  std::filesystem::path root_;
  RawConfig raw_;
};

TEST_F(PipelineTest, RepeatedRunsGiveIdenticalMetrics) {
  const ExperimentConfig a = Config("a", raw_);
  const ExperimentConfig b = Config("b", raw_);
  StagePipeline(a, true);
  StagePipeline(b, true);
  for (const char* f :
       {"privacy/privacy_report.csv", "privacy/summary.csv", "ffd/ffd.csv",
        "pac/pac_result.csv", "pac/sigma_b.csv", "pac/outputs.csv",
        "samples/samples.csv", "score/losses.csv"}) {
    ASSERT_TRUE(std::filesystem::exists(a.out_dir / f)) << f;
    EXPECT_EQ(Slurp(a.out_dir / f), Slurp(b.out_dir / f)) << f;
  }
}

TEST_F(PipelineTest, EveryStageWritesManifest) {
  const ExperimentConfig cfg = Config("m", raw_);
  StagePipeline(cfg, true);
  for (const char* d :
       {"data", "score", "classifiers", "samples", "privacy", "ffd", "pac"}) {
    const auto path = cfg.out_dir / d / "manifest.csv";
    ASSERT_TRUE(std::filesystem::exists(path)) << d;
    const CsvTable t = ReadCsvTable(path, true);
    std::map<std::string, std::string> kv;
    for (const auto& row : t.rows) kv[row[0]] = row[1];
    EXPECT_EQ(kv["config_hash"], ConfigHash(cfg));
    EXPECT_EQ(kv["flag.recovery_direction"], "(anchor - x_tilde)/delta^2");
    EXPECT_EQ(kv["flag.guidance_covariance"], "alpha_i*I");
    EXPECT_FALSE(kv["flag.branch_condition"].empty());
    EXPECT_EQ(kv["config.rr.epsilon"], "2");
    EXPECT_EQ(kv["seed.sampler"], std::to_string(cfg.sampler_seed));
  }
}

TEST_F(PipelineTest, ZeroGradientScaleReportsUnguidedBaseline) {
  RawConfig raw = raw_;
  ApplyOverride(raw, "sampler.gradient_scale=0");
  const ExperimentConfig cfg = Config("k0", raw);
  StagePipeline(cfg, false);

  const LabeledDataset data = MakeDataset(cfg, cfg.dataset_seed);
  TrainedModels models = TrainModels(cfg, data);
  models.guide.reset();
  const SampleBatch unguided = GenerateSamples(cfg, models, cfg.n_samples);
  EXPECT_EQ(LoadSamples(SamplesPath(cfg)).samples, unguided.samples);
  const CsvTable summary =
      ReadCsvTable(cfg.out_dir / "privacy/summary.csv", true);
  const ClassifierNet metric =
      ClassifierNet::Load(cfg.out_dir / "classifiers/metric");
  const ClassifierNet embedder =
      ClassifierNet::Load(cfg.out_dir / "classifiers/embedder");
  const PrivacyReport expected =
      PrivacyScore(unguided.samples, data.samples, embedder, metric);
  EXPECT_EQ(ParseDouble(summary.rows[0][0], "score"), expected.score);
}

TEST_F(PipelineTest, StageFailureNamesStage) {
  const ExperimentConfig cfg = Config("missing", raw_);
  try {
    RunStage("sample", [&] { StageSample(cfg); });
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "sample");
    EXPECT_NE(std::string(e.what()).find("stage 'sample' failed"),
              std::string::npos);
  }
}

TEST_F(PipelineTest, MechanismRunsAreDeterministicAndSeeded) {
  const ExperimentConfig cfg = Config("mech", raw_);
  EXPECT_EQ(RunMechanism(cfg, 1), RunMechanism(cfg, 1));
  EXPECT_NE(RunMechanism(cfg, 1), RunMechanism(cfg, 2));
  EXPECT_EQ(RunMechanism(cfg, 0).size(), 2u);
  EXPECT_NE(RunSeed(cfg.dataset_seed, 0), RunSeed(cfg.dataset_seed, 1));
}

TEST_F(PipelineTest, GlyphPipelineRuns) {
  RawConfig raw = raw_;
  raw["dataset.kind"] = "glyphs";
  raw["dataset.n"] = "60";
  raw["classifier.guide.layers"] = "16:8";
  raw["classifier.metric.layers"] = "16:8";
  const ExperimentConfig cfg = Config("glyphs", raw);
  StagePipeline(cfg, false);
  EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / "samples/images"));
  EXPECT_TRUE(std::filesystem::exists(cfg.out_dir / "privacy/audits"));
}

}  // namespace
}  // namespace pacdiff
