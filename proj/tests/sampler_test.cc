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

#include "pacdiff/sampler.h"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <unistd.h>

#include <gtest/gtest.h>

#include "pacdiff/datasets.h"
#include "pacdiff/linalg.h"
#include "pacdiff/rng.h"

namespace pacdiff {
namespace {

RowScore ConstantScore(std::vector<double> s) {
  return RowScore([s](std::span<const double>, std::size_t) { return s; });
}

RowScore MixtureScore(const MixtureSpec& spec, const NoiseSchedule& sched) {
  return RowScore([spec, sched](std::span<const double> x, std::size_t level) {
    const auto s = AnalyticScoreGmm(spec, x, sched[level]);
    return std::vector<double>{s[0], s[1]};
  });
}

SamplerConfig Config(NoiseSchedule schedule) {
  SamplerConfig c;
  c.schedule = std::move(schedule);
  c.steps_per_level = 20;
  c.base_step = 1e-3;
  c.seed = 9;
  return c;
}

TEST(StepTest, StepSizeScalesWithLevel) {
  const SamplerConfig c = Config(NoiseSchedule({4.0, 2.0, 1.0}));
  EXPECT_DOUBLE_EQ(StepSize(c, 0), 16e-3);
  EXPECT_DOUBLE_EQ(StepSize(c, 2), 1e-3);
}

TEST(StepTest, DeterministicDriftWithZeroNoise) {
  SamplerConfig c = Config(NoiseSchedule({1.0}));
  c.base_step = 0.2;
  const Tensor x = Tensor::FromRows({{1.0, 2.0}});
  const Tensor z({1, 2});
  const Tensor next = LangevinStepWithNoise(x, 0, ConstantScore({3.0, -1.0}),
                                            nullptr, {}, c, z);
  EXPECT_DOUBLE_EQ(next.at(0, 0), 1.0 + 0.1 * 3.0);
  EXPECT_DOUBLE_EQ(next.at(0, 1), 2.0 - 0.1);
}

TEST(StepTest, ZeroScoreZeroNoiseIsIdentity) {
  const SamplerConfig c = Config(NoiseSchedule({1.0}));
  const Tensor x = Tensor::FromRows({{1.0, 2.0}});
  EXPECT_EQ(LangevinStepWithNoise(x, 0, ConstantScore({0, 0}), nullptr, {}, c,
                                  Tensor({1, 2})),
            x);
}

TEST(StepTest, NoiseShapeMismatchRejected) {
  const SamplerConfig c = Config(NoiseSchedule({1.0}));
  EXPECT_THROW(LangevinStepWithNoise(Tensor({1, 2}), 0, ConstantScore({0, 0}),
                                     nullptr, {}, c, Tensor({2, 2})),
               std::invalid_argument);
}

class GuidedSamplerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = MakeGmm2d(1, 400, spec_);
    guide_ = TrainClassifier(data_, schedule_, ClassifierConfig{},
                             TrainConfig{0.05, 800, 32, 4});
  }
  MixtureSpec spec_;
  NoiseSchedule schedule_ = NoiseSchedule::Geometric(2.0, 0.1, 5);
  LabeledDataset data_;
  ClassifierNet guide_;
};

TEST_F(GuidedSamplerTest, ZeroScaleBitIdenticalToUnguided) {
  SamplerConfig c = Config(schedule_);
  c.gradient_scale = 0.0;
  const RowScore score = MixtureScore(spec_, schedule_);
  const SampleBatch a = LangevinSample(score, nullptr, c, 50, 2);
  const SampleBatch b = LangevinSample(score, &guide_, c, 50, 2);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.labels, b.labels);
}

TEST_F(GuidedSamplerTest, GuidanceAddsScaledClassifierGradient) {
  SamplerConfig c = Config(schedule_);
  c.gradient_scale = 3.0;
  Rng rng(11);
  const Tensor x = Gaussian(rng, {6, 2});
  const Tensor z = Gaussian(rng, {6, 2});
  const std::vector<int> labels = {0, 1, 1, 0, 1, 0};
  const RowScore score = MixtureScore(spec_, schedule_);
  for (std::size_t level = 0; level < schedule_.size(); ++level) {
    const Tensor guided =
        LangevinStepWithNoise(x, level, score, &guide_, labels, c, z);
    const Tensor plain =
        LangevinStepWithNoise(x, level, score, nullptr, labels, c, z);
    const Tensor grad = GradLogProbInput(guide_, x, level, labels);
    const double alpha = StepSize(c, level);
    for (std::size_t i = 0; i < x.size(); ++i)
      EXPECT_NEAR(guided[i] - plain[i], 3.0 * alpha * grad[i], 1e-12);
  }
}

TEST_F(GuidedSamplerTest, DeterministicForSeed) {
  SamplerConfig c = Config(schedule_);
  c.gradient_scale = 2.0;
  const RowScore score = MixtureScore(spec_, schedule_);
  EXPECT_EQ(LangevinSample(score, &guide_, c, 30, 2).samples,
            LangevinSample(score, &guide_, c, 30, 2).samples);
}

TEST_F(GuidedSamplerTest, ChainsIndependentOfBatchSize) {
  const SamplerConfig c = Config(schedule_);
  const RowScore score = MixtureScore(spec_, schedule_);
  const SampleBatch big = LangevinSample(score, nullptr, c, 40, 2);
  const SampleBatch small = LangevinSample(score, nullptr, c, 10, 2);
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_EQ(big.samples.at(r, j), small.samples.at(r, j));
}

TEST_F(GuidedSamplerTest, GuidanceResponseIsMonotone) {
  SamplerConfig c = Config(schedule_);
  c.steps_per_level = 30;
  c.base_step = 2e-3;
  c.target_label = 1;
  const RowScore score = MixtureScore(spec_, schedule_);
  const ClassifierNet judge = TrainClassifier(
      data_, std::nullopt, ClassifierConfig{}, TrainConfig{0.05, 600, 32, 8});
  std::vector<double> frac;
  for (double k : {0.0, 2.0, 10.0}) {
    c.gradient_scale = k;
    const SampleBatch b = LangevinSample(score, &guide_, c, 400, 2);
    const auto pred = Predict(judge, b.samples);
    double ones = 0.0;
    for (int p : pred) ones += p;
    frac.push_back(ones / pred.size());
  }
  EXPECT_LE(frac[0], frac[1]);
  EXPECT_LE(frac[1], frac[2]);
  EXPECT_GE(frac[2] - frac[0], 0.1);
}

TEST(SamplerTest, MixtureOccupancyMatchesWeights) {
  const MixtureSpec spec{2, 2.0, 0.5};
  const NoiseSchedule schedule = NoiseSchedule::Geometric(3.0, 0.1, 8);
  SamplerConfig c = Config(schedule);
  c.steps_per_level = 50;
  c.base_step = 0.002;
  const SampleBatch b = LangevinSample(MixtureScore(spec, schedule), nullptr,
                                       c, 2000, 2);
  double right = 0.0;
  for (std::size_t r = 0; r < 2000; ++r) right += b.samples.at(r, 0) > 0.0;
  const double sigma = std::sqrt(2000 * 0.25);
  EXPECT_LE(std::abs(right - 1000.0), 4 * sigma);
}

TEST(SamplerTest, StandardNormalMomentsMatchLongRunReference) {
  SamplerConfig c;
  c.schedule = NoiseSchedule({1.0});
  c.steps_per_level = 2000;
  c.base_step = 0.05;
  c.seed = 17;
  const RowScore score([](std::span<const double> x, std::size_t) {
    return std::vector<double>{-x[0]};
  });
  const SampleBatch b = LangevinSample(score, nullptr, c, 2000, 1);
  const linalg::Moments m = linalg::EmpiricalMoments(b.samples);

  // Brute-force reference: one chain of 1e5 steps, first 1e3 discarded.
  Rng rng(18);
  double x = 0.0, sum = 0.0, sum_sq = 0.0;
  const int burn = 1000, steps = 100000;
  for (int t = 0; t < steps; ++t) {
    x = x - 0.025 * x + std::sqrt(0.05) * rng.Gaussian();
    if (t >= burn) {
      sum += x;
      sum_sq += x * x;
    }
  }
  const double ref_mean = sum / (steps - burn);
  const double ref_var = sum_sq / (steps - burn) - ref_mean * ref_mean;
  EXPECT_NEAR(m.mean[0], ref_mean, 0.1);
  EXPECT_NEAR(m.cov.at(0, 0), ref_var, 0.15);
  EXPECT_NEAR(m.cov.at(0, 0), 1.0, 0.15);
}

TEST(SamplerTest, NonFiniteStateAbortsWithDiagnostics) {
  SamplerConfig c = Config(NoiseSchedule({1.0}));
  const RowScore bad([](std::span<const double>, std::size_t) {
    return std::vector<double>{NAN, 0.0};
  });
  try {
    LangevinSample(bad, nullptr, c, 2, 2);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("level 0, step 0"), std::string::npos);
  }
}

TEST(SamplerTest, SaveLoadPoints) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("pacdiff_samples_" + std::to_string(::getpid()) + ".csv");
  const SamplerConfig c = Config(NoiseSchedule({1.0}));
  const SampleBatch b = LangevinSample(ConstantScore({0, 0}), nullptr, c, 5, 2);
  SaveSamples(b, {2}, path);
  const SampleBatch l = LoadSamples(path);
  EXPECT_EQ(l.samples, b.samples);
  EXPECT_EQ(l.labels, b.labels);
  EXPECT_EQ(l.chain_seeds, b.chain_seeds);
  std::filesystem::remove(path);
}

TEST(SamplerTest, SaveLoadImages) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("pacdiff_imgs_" + std::to_string(::getpid()));
  const SamplerConfig c = Config(NoiseSchedule({1.0}));
  const SampleBatch b =
      LangevinSample(ConstantScore(std::vector<double>(16, 0.0)), nullptr, c, 3, 16);
  SaveSamples(b, {4, 4}, dir);
  std::vector<std::size_t> shape;
  const SampleBatch l = LoadSamples(dir, &shape);
  EXPECT_EQ(l.samples, b.samples);
  EXPECT_EQ(l.labels, b.labels);
  EXPECT_EQ(shape, (std::vector<std::size_t>{4, 4}));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pacdiff
