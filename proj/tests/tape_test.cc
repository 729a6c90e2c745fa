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

#include "pacdiff/tape.h"

#include <stdexcept>

#include <gtest/gtest.h>

#include "gradient_check.h"
#include "pacdiff/classifier.h"
#include "pacdiff/datasets.h"
#include "pacdiff/rng.h"
#include "pacdiff/score_model.h"

namespace pacdiff {
namespace {

using testing::kFdTolerance;

class PrimitiveGradientTest
    : public ::testing::TestWithParam<testing::PrimitiveCase> {};

TEST_P(PrimitiveGradientTest, MatchesCentralDifferences) {
  Rng rng(17);
  for (int probe = 0; probe < 20; ++probe)
    ASSERT_LE(testing::ProbePrimitive(GetParam(), rng), kFdTolerance)
        << "probe " << probe;
}

INSTANTIATE_TEST_SUITE_P(
    AllPrimitives, PrimitiveGradientTest,
    ::testing::ValuesIn(testing::PrimitiveCases()),
    [](const auto& info) { return info.param.name; });

TEST(TapeTest, BackwardRejectsNonScalarOutput) {
  Tape tape;
  const NodeId x = tape.Leaf(Tensor({2, 2}, 1.0));
  EXPECT_THROW(tape.Backward(tape.Relu(x)), std::invalid_argument);
}

TEST(TapeTest, UnusedNodesGetZeroGradient) {
  Tape tape;
  const NodeId x = tape.Leaf(Tensor::Vector({1, 2}));
  const NodeId unused = tape.Leaf(Tensor::Vector({3, 4}));
  const Gradients g = tape.Backward(tape.Sum(x));
  EXPECT_EQ(g[unused], Tensor::Vector({0, 0}));
  EXPECT_EQ(g[x], Tensor::Vector({1, 1}));
}

TEST(TapeTest, ReusedNodeAccumulates) {
  Tape tape;
  const NodeId x = tape.Leaf(Tensor::Vector({3}));
  const NodeId y = tape.Mul(x, x);
  const Gradients g = tape.Backward(tape.Sum(y));
  EXPECT_DOUBLE_EQ(g[x][0], 6.0);
}

TEST(TapeTest, ReplayReproducesForwardValues) {
  Rng rng(3);
  Tape tape;
  const NodeId a = tape.Leaf(Gaussian(rng, {4, 3}));
  const NodeId w = tape.Leaf(Gaussian(rng, {3, 2}));
  const NodeId b = tape.Leaf(Gaussian(rng, {2}));
  const NodeId h = tape.Tanh(tape.Add(tape.Matmul(a, w), b));
  tape.Mean(tape.LogSoftmax(h));
  const std::vector<Tensor> replay = tape.Replay();
  ASSERT_EQ(replay.size(), tape.size());
  for (std::size_t i = 0; i < tape.size(); ++i)
    EXPECT_EQ(replay[i], tape.Value(NodeId{i})) << "node " << i;
}

TEST(InputGradientTest, CleanClassifier) {
  const ClassifierNet net =
      ClassifierNet::Create(3, std::nullopt, ClassifierConfig{{8, 4}}, 5);
  Rng rng(11);
  for (int probe = 0; probe < 10; ++probe)
    EXPECT_LE(testing::ProbeClassifierInputGradient(net, std::nullopt, rng),
              kFdTolerance);
}

TEST(InputGradientTest, NoisyClassifierIgnoresOneHotColumns) {
  const NoiseSchedule schedule = NoiseSchedule::Geometric(1.0, 0.1, 4);
  const ClassifierNet net = ClassifierNet::Create(
      2, schedule, ClassifierConfig{{8, 4}, Activation::kTanh}, 6);
  Rng rng(12);
  for (int probe = 0; probe < 10; ++probe) {
    const Tensor g = GradLogProbInput(
        net, Gaussian(rng, {3, 2}), probe % 4, std::vector<int>{0, 1, 0});
    EXPECT_EQ(g.shape(), (std::vector<std::size_t>{3, 2}));
    EXPECT_LE(testing::ProbeClassifierInputGradient(net, probe % 4, rng),
              kFdTolerance);
  }
}

TEST(InputGradientTest, DsmLossParameters) {
  const LabeledDataset data = MakeGmm2d(1, 64, MixtureSpec{});
  const NoiseSchedule schedule = NoiseSchedule::Geometric(2.0, 0.1, 5);
  const ScoreNet net = ScoreNet::Create(2, schedule, ScoreNetConfig{{8, 8}}, 9);
  Rng rng(13);
  for (int probe = 0; probe < 5; ++probe) {
    const std::vector<std::size_t> sources = {1, 5, 9, 33};
    const DsmBatch batch = SampleDsmBatch(data, sources, schedule,
                                          RrConfig{2.0, 3}, false, rng);
    EXPECT_LE(testing::ProbeDsmParameterGradient(net, batch), kFdTolerance);
  }
}

}  // namespace
}  // namespace pacdiff
