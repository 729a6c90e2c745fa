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

#include "pacdiff/datasets.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <unistd.h>

#include <gtest/gtest.h>

#include "pacdiff/csv_io.h"
#include "pacdiff/rng.h"

namespace pacdiff {
namespace {

std::size_t CountOnes(const LabeledDataset& d) {
  std::size_t ones = 0;
  for (int y : d.labels) ones += y == 1;
  return ones;
}

void ExpectBalanced(const LabeledDataset& d) {
  const double n = static_cast<double>(d.size());
  const double ones = static_cast<double>(CountOnes(d));
  EXPECT_LE(std::abs(2.0 * ones - n), std::max(1.0, 0.05 * n));
}

TEST(Gmm2dTest, DegenerateCentersGiveStandardCloud) {
  const LabeledDataset d = MakeGmm2d(1, 2000, MixtureSpec{2, 0.0, 1.0});
  ExpectBalanced(d);
  double m = 0.0;
  for (double v : d.samples.values()) m += v;
  EXPECT_NEAR(m / d.samples.size(), 0.0, 0.1);
}

TEST(Gmm2dTest, ComponentCountsConcentrate) {
  const MixtureSpec spec{8, 4.0, 0.3};
  const std::size_t n = 4000;
  const auto comp = Gmm2dComponents(7, n, spec);
  std::vector<double> counts(8, 0.0);
  for (auto c : comp) counts[c] += 1.0;
  const double expected = n / 8.0;
  for (double c : counts) EXPECT_LE(std::abs(c - expected), 3 * std::sqrt(expected));
}

TEST(Gmm2dTest, SamplesSitNearTheirComponent) {
  const MixtureSpec spec{8, 4.0, 0.3};
  const LabeledDataset d = MakeGmm2d(7, 400, spec);
  const auto comp = Gmm2dComponents(7, 400, spec);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto c = spec.Center(comp[i]);
    EXPECT_LT(std::hypot(d.samples.at(i, 0) - c[0], d.samples.at(i, 1) - c[1]),
              6 * spec.sigma);
    EXPECT_EQ(d.labels[i], static_cast<int>(comp[i] % 2));
  }
}

TEST(Gmm2dTest, DeterministicAndBalanced) {
  const LabeledDataset a = MakeGmm2d(3, 501, MixtureSpec{});
  const LabeledDataset b = MakeGmm2d(3, 501, MixtureSpec{});
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.labels, b.labels);
  ExpectBalanced(a);
}

TEST(Gmm2dTest, OddComponentCountRejected) {
  EXPECT_THROW(MakeGmm2d(1, 100, MixtureSpec{3, 1.0, 1.0}),
               std::invalid_argument);
}

TEST(GlyphsTest, TwoItemsOneOfEach) {
  const LabeledDataset d = MakeGlyphs(1, 2);
  EXPECT_EQ(CountOnes(d), 1u);
  EXPECT_EQ(d.sample_shape, (std::vector<std::size_t>{8, 8}));
}

TEST(GlyphsTest, PixelsInUnitIntervalAndQuantized) {
  const LabeledDataset d = MakeGlyphs(2, 200);
  for (double v : d.samples.values()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_EQ(v, QuantizePixel(v));
  }
  ExpectBalanced(d);
}

TEST(GlyphsTest, OddCountRejected) {
  EXPECT_THROW(MakeGlyphs(1, 3), std::invalid_argument);
}

// Regression value measured from the deterministic generator.
TEST(GlyphsTest, ClassMeanIntensityMargin) {
  const LabeledDataset d = MakeGlyphs(11, 1000);
  double sum[2] = {0, 0};
  double cnt[2] = {0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.samples.row(i)) sum[d.labels[i]] += v;
    cnt[d.labels[i]] += static_cast<double>(d.dim());
  }
  EXPECT_GE(sum[1] / cnt[1] - sum[0] / cnt[0], 0.005);
}

TEST(AnalyticScoreTest, StandardNormal) {
  const MixtureSpec spec{1, 0.0, 1.0};
  const double x[] = {2.0, 0.0};
  const auto s = AnalyticScoreGmm(spec, x, 0.0);
  EXPECT_DOUBLE_EQ(s[0], -2.0);
  EXPECT_DOUBLE_EQ(s[1], 0.0);
}

TEST(AnalyticScoreTest, ZeroAtMidpointOfSymmetricMixture) {
  const double x[] = {0.0, 0.0};
  const auto s = AnalyticScoreGmm(MixtureSpec{}, x, 0.3);
  EXPECT_NEAR(s[0], 0.0, 1e-15);
  EXPECT_NEAR(s[1], 0.0, 1e-15);
}

double LogDensity(const MixtureSpec& spec, double x, double y, double delta) {
  const double var = spec.sigma * spec.sigma + delta * delta;
  double p = 0.0;
  for (std::size_t m = 0; m < spec.components; ++m) {
    const auto c = spec.Center(m);
    const double r2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
    p += std::exp(-r2 / (2 * var)) / (2 * M_PI * var * spec.components);
  }
  return std::log(p);
}

TEST(AnalyticScoreTest, MatchesFiniteDifferencesOfLogDensity) {
  Rng rng(5);
  const MixtureSpec spec{4, 2.0, 0.5};
  for (int probe = 0; probe < 100; ++probe) {
    const double x = 2.0 * rng.Gaussian();
    const double y = 2.0 * rng.Gaussian();
    const double delta = rng.Uniform();
    const double h = 1e-5;
    const double gx = (LogDensity(spec, x + h, y, delta) -
                       LogDensity(spec, x - h, y, delta)) / (2 * h);
    const double gy = (LogDensity(spec, x, y + h, delta) -
                       LogDensity(spec, x, y - h, delta)) / (2 * h);
    const double pt[] = {x, y};
    const auto s = AnalyticScoreGmm(spec, pt, delta);
    const double err = std::hypot(s[0] - gx, s[1] - gy) /
                       std::max(1e-3, std::hypot(gx, gy));
    EXPECT_LE(err, 1e-6) << "probe " << probe;
  }
}

class DatasetIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("pacdiff_ds_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(DatasetIoTest, PointsRoundTrip) {
  const LabeledDataset d = MakeGmm2d(1, 50, MixtureSpec{});
  SaveDataset(d, dir_ / "d.csv");
  const LabeledDataset e = LoadDataset(dir_ / "d.csv");
  EXPECT_EQ(e.samples, d.samples);
  EXPECT_EQ(e.labels, d.labels);
}

TEST_F(DatasetIoTest, GlyphsRoundTrip) {
  const LabeledDataset d = MakeGlyphs(1, 10);
  SaveDataset(d, dir_ / "imgs");
  const LabeledDataset e = LoadDataset(dir_ / "imgs");
  EXPECT_EQ(e.samples, d.samples);
  EXPECT_EQ(e.labels, d.labels);
  EXPECT_EQ(e.sample_shape, d.sample_shape);
}

TEST_F(DatasetIoTest, EmptyManifestRejected) {
  std::filesystem::create_directories(dir_ / "imgs");
  std::ofstream(dir_ / "imgs" / "labels.csv") << "filename,label\n";
  EXPECT_THROW(LoadDataset(dir_ / "imgs"), FormatError);
}

TEST_F(DatasetIoTest, BadLabelRejected) {
  std::ofstream(dir_ / "d.csv") << "x,y,label\n0.5,0.5,2\n";
  EXPECT_THROW(LoadDataset(dir_ / "d.csv"), FormatError);
}

}  // namespace
}  // namespace pacdiff
