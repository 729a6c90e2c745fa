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

// Command-line driver for the experiment stages.
//
//   pacdiff <stage> --config run.cfg [--set key=value]... [--out DIR]
//
// Stages: gen-data, train-score, train-classifier, sample, privacy-score,
// ffd, pac-noise, pipeline.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pacdiff/config.h"
#include "pacdiff/linalg.h"
#include "pacdiff/pipeline.h"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool skip_pac = false;
};

pacdiff::ExperimentConfig LoadConfig(const Options& opt) {
  pacdiff::RawConfig raw;
  if (!opt.config_path.empty()) raw = pacdiff::ReadConfigFile(opt.config_path);
  for (const auto& s : opt.overrides) pacdiff::ApplyOverride(raw, s);
  if (!opt.out_dir.empty()) raw["out.dir"] = opt.out_dir;
  return pacdiff::ResolveConfig(raw);
}

int RunCommand(const std::string& name, const Options& opt) {
  pacdiff::ExperimentConfig cfg;
  try {
    cfg = LoadConfig(opt);
  } catch (const pacdiff::ConfigError& e) {
    std::fprintf(stderr, "pacdiff: config error: %s\n", e.what());
    return 2;
  }
  try {
    if (name == "pipeline") {
      pacdiff::StagePipeline(cfg, !opt.skip_pac);
      std::printf("pipeline complete: %s\n", cfg.out_dir.string().c_str());
      return 0;
    }
    pacdiff::RunStage(name, [&] {
      if (name == "gen-data") {
        pacdiff::StageGenData(cfg);
      } else if (name == "train-score") {
        pacdiff::StageTrainScore(cfg);
      } else if (name == "train-classifier") {
        pacdiff::StageTrainClassifiers(cfg);
      } else if (name == "sample") {
        pacdiff::StageSample(cfg);
      } else if (name == "privacy-score") {
        const auto report = pacdiff::StagePrivacyScore(cfg);
        std::printf("privacy_score %.6f (n=%zu)\n", report.score, report.n);
      } else if (name == "ffd") {
        std::printf("ffd %.6f\n", pacdiff::StageFfd(cfg));
      } else if (name == "pac-noise") {
        const auto res = pacdiff::StagePacNoise(cfg);
        std::printf("branch %s trace(Sigma_B) %.6g E||B|| %.6g +- %.2g\n",
                    pacdiff::BranchName(res.branch).c_str(),
                    pacdiff::linalg::Trace(res.sigma_b), res.e_norm.mc,
                    res.e_norm.standard_error);
      }
    });
  } catch (const pacdiff::StageError& e) {
    std::fprintf(stderr, "pacdiff: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving score-based generation experiments"};
  app.require_subcommand(1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "Generate the training dataset"},
      {"train-score", "Train the score network with randomized response"},
      {"train-classifier", "Train the guide, metric and embedder classifiers"},
      {"sample", "Run annealed Langevin sampling"},
      {"privacy-score", "Nearest-neighbor label-disagreement privacy score"},
      {"ffd", "Feature Frechet distance of samples vs. training data"},
      {"pac-noise", "Calibrate Gaussian output noise over retrained runs"},
      {"pipeline", "Run every stage in order"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "Config file (key = value)");
    sub->add_option("--set", opt.overrides, "Override, key=value")
        ->take_all()
        ->allow_extra_args(false);
    sub->add_option("--out", opt.out_dir, "Artifact directory (out.dir)");
    if (name == "pipeline")
      sub->add_flag("--skip-pac", opt.skip_pac, "Do not run pac-noise");
  }
  CLI11_PARSE(app, argc, argv);
  for (CLI::App* sub : app.get_subcommands())
    return RunCommand(sub->get_name(), opt);
  return 2;
}
