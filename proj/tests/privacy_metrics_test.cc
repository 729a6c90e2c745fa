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

#include "pacdiff/privacy_metrics.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include <unistd.h>

#include <gtest/gtest.h>

#include "pacdiff/csv_io.h"
#include "pacdiff/linalg.h"
#include "pacdiff/rng.h"

namespace pacdiff {
namespace {

using ops::Add;
using ops::Matmul;

Tensor IdentityEmbed(const Tensor& x) { return x; }

// Label 1 when the first coordinate is positive.
std::vector<int> SignLabel(const Tensor& x) {
  std::vector<int> out;
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(x.at(r, 0) > 0.0);
  return out;
}

Tensor Column(std::vector<double> v) {
  Tensor t({v.size(), 1});
  std::copy(v.begin(), v.end(), t.data().begin());
  return t;
}

Tensor RandomOrthogonal(Rng& rng, std::size_t d) {
  const Tensor a = Gaussian(rng, {d, d});
  return linalg::Eigh(Add(a, a.Transposed())).vectors;
}

TEST(PrivacyScoreTest, IdenticalSetsScoreZero) {
  Rng rng(1);
  const Tensor x = Gaussian(rng, {50, 3});
  const PrivacyReport r = PrivacyScore(x, x, IdentityEmbed, SignLabel);
  EXPECT_EQ(r.score, 0.0);
  EXPECT_EQ(r.n, 50u);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(r.audits[i].nn_id, i);
}

TEST(PrivacyScoreTest, ConstantClassifierScoresZero) {
  Rng rng(2);
  const Tensor g = Gaussian(rng, {40, 2});
  const Tensor t = Gaussian(rng, {60, 2});
  const LabelPredictor constant = [](const Tensor& x) {
    return std::vector<int>(x.rows(), 1);
  };
  EXPECT_EQ(PrivacyScore(g, t, IdentityEmbed, constant).score, 0.0);
}

TEST(PrivacyScoreTest, HandBuiltFourPointCase) {
  // Ground truth {0, 10}; generated {1, 9, 2, 8} pair with {0, 10, 0, 10}.
  // Labels: 1 at values {0, 1, 8}, else 0. Pairs 3 and 4 disagree.
  const LabelPredictor clf = [](const Tensor& x) {
    std::vector<int> out;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double v = x.at(r, 0);
      out.push_back(v == 0.0 || v == 1.0 || v == 8.0);
    }
    return out;
  };
  const PrivacyReport r =
      PrivacyScore(Column({1, 9, 2, 8}), Column({0, 10}), IdentityEmbed, clf);
  EXPECT_DOUBLE_EQ(r.score, 0.5);
  const std::vector<std::size_t> nn = {0, 1, 0, 1};
  const std::vector<bool> differs = {false, false, true, true};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r.audits[i].gen_id, i);
    EXPECT_EQ(r.audits[i].nn_id, nn[i]);
    EXPECT_EQ(r.audits[i].differs(), differs[i]);
  }
  EXPECT_DOUBLE_EQ(r.audits[2].l2, 2.0);
}

TEST(PrivacyScoreTest, TiesGoToLowestIndex) {
  const PrivacyReport r = PrivacyScore(Column({5}), Column({4, 6, 4}),
                                       IdentityEmbed, SignLabel);
  EXPECT_EQ(r.audits[0].nn_id, 0u);
}

TEST(PrivacyScoreTest, OneFlipMovesScoreByOneOverN) {
  Rng rng(3);
  const Tensor g = Gaussian(rng, {37, 2});
  const Tensor t = Gaussian(rng, {80, 2});
  const PrivacyReport base = PrivacyScore(g, t, IdentityEmbed, SignLabel);
  for (std::size_t flip : {0u, 11u, 36u}) {
    const double target = g.at(flip, 0);
    const LabelPredictor flipped = [&](const Tensor& x) {
      std::vector<int> out = SignLabel(x);
      for (std::size_t r = 0; r < x.rows(); ++r)
        if (x.at(r, 0) == target && x.rows() == g.rows()) out[r] = 1 - out[r];
      return out;
    };
    const PrivacyReport r = PrivacyScore(g, t, IdentityEmbed, flipped);
    EXPECT_NEAR(std::abs(r.score - base.score), 1.0 / 37.0, 1e-15);
  }
}

TEST(PrivacyScoreTest, InvariantUnderPermutation) {
  Rng rng(4);
  const Tensor g = Gaussian(rng, {30, 3});
  const Tensor t = Gaussian(rng, {45, 3});
  const double base = PrivacyScore(g, t, IdentityEmbed, SignLabel).score;
  std::vector<std::size_t> pg(30), pt(45);
  std::iota(pg.begin(), pg.end(), 0);
  std::iota(pt.begin(), pt.end(), 0);
  Shuffle(pg, rng);
  Shuffle(pt, rng);
  EXPECT_EQ(PrivacyScore(GatherRows(g, pg), GatherRows(t, pt), IdentityEmbed,
                         SignLabel)
                .score,
            base);
}

TEST(PrivacyScoreTest, InvariantUnderFeatureIsometry) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor g = Gaussian(rng, {40, 4});
    const Tensor t = Gaussian(rng, {60, 4});
    const Tensor q = RandomOrthogonal(rng, 4);
    const Tensor shift = Gaussian(rng, {4});
    const FeatureMap rotated = [&](const Tensor& x) {
      return Add(Matmul(x, q), shift);
    };
    const PrivacyReport a = PrivacyScore(g, t, IdentityEmbed, SignLabel);
    const PrivacyReport b = PrivacyScore(g, t, rotated, SignLabel);
    EXPECT_EQ(a.score, b.score);
    for (std::size_t i = 0; i < 40; ++i)
      EXPECT_EQ(a.audits[i].nn_id, b.audits[i].nn_id);
  }
}

TEST(PrivacyScoreTest, EmptySetsRejected) {
  EXPECT_THROW(PrivacyScore(Tensor({0, 2}), Tensor({3, 2}), IdentityEmbed,
                            SignLabel),
               std::invalid_argument);
  EXPECT_THROW(PrivacyScore(Tensor({3, 2}), Tensor({0, 2}), IdentityEmbed,
                            SignLabel),
               std::invalid_argument);
}

TEST(PrivacyScoreTest, NoisyClassifierRejected) {
  const ClassifierNet clean =
      ClassifierNet::Create(2, std::nullopt, ClassifierConfig{}, 1);
  const ClassifierNet noisy = ClassifierNet::Create(
      2, NoiseSchedule({1.0, 0.1}), ClassifierConfig{}, 1);
  const Tensor x({3, 2});
  EXPECT_THROW(PrivacyScore(x, x, clean, noisy), std::invalid_argument);
  EXPECT_THROW(PrivacyScore(x, x, noisy, clean), std::invalid_argument);
  EXPECT_EQ(PrivacyScore(x, x, clean, clean).score, 0.0);
}

TEST(PrivacyScoreTest, ReportCsvLayout) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("pacdiff_priv_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const PrivacyReport r =
      PrivacyScore(Column({1, -1}), Column({2, -2}), IdentityEmbed, SignLabel);
  WritePrivacyReport(dir / "report.csv", r);
  const CsvTable t = ReadCsvTable(dir / "report.csv", true);
  EXPECT_EQ(t.header, (std::vector<std::string>{"gen_id", "nn_id", "l2",
                                                "label_gen", "label_nn",
                                                "differs"}));
  EXPECT_EQ(t.rows.size(), 2u);
  WriteMetricSummary(dir / "summary.csv", r, 1.5);
  EXPECT_EQ(ReadCsvTable(dir / "summary.csv", true).header,
            (std::vector<std::string>{"score", "n", "ffd", "embedder",
                                      "classifier"}));
  std::filesystem::remove_all(dir);
}

TEST(FfdTest, SelfDistanceIsZero) {
  Rng rng(6);
  const Tensor x = Gaussian(rng, {100, 3});
  EXPECT_NEAR(FeatureFrechetDistance(x, x, IdentityEmbed), 0.0, 1e-8);
}

TEST(FfdTest, ConstantShiftAddsSquaredNorm) {
  Rng rng(7);
  const Tensor x = Gaussian(rng, {200, 3});
  const Tensor c = Tensor::Vector({0.5, -1.0, 2.0});
  EXPECT_NEAR(FeatureFrechetDistance(Add(x, c), x, IdentityEmbed), 5.25, 1e-8);
}

TEST(FfdTest, DisjointHalvesShrinkWithSetSize) {
  Rng rng(8);
  auto halves = [&](std::size_t n) {
    const Tensor x = Gaussian(rng, {n, 3});
    std::vector<std::size_t> a(n / 2), b(n / 2);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), n / 2);
    return FeatureFrechetDistance(GatherRows(x, a), GatherRows(x, b),
                                  IdentityEmbed);
  };
  double small = 0.0, large = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    small += halves(200);
    large += halves(1000);
  }
  EXPECT_LT(large, small);
  EXPECT_LT(small / 5, 0.2);
}

TEST(FfdTest, UndersizedSetsRejected) {
  Rng rng(9);
  const Tensor ok = Gaussian(rng, {4, 3});
  const Tensor few = Gaussian(rng, {3, 3});
  EXPECT_NO_THROW(FeatureFrechetDistance(ok, ok, IdentityEmbed));
  EXPECT_THROW(FeatureFrechetDistance(few, ok, IdentityEmbed),
               std::invalid_argument);
  EXPECT_THROW(FeatureFrechetDistance(ok, few, IdentityEmbed),
               std::invalid_argument);
}

}  // namespace
}  // namespace pacdiff
