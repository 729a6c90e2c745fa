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

#ifndef PACDIFF_CLASSIFIER_H_
#define PACDIFF_CLASSIFIER_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pacdiff/datasets.h"
#include "pacdiff/mlp.h"
#include "pacdiff/score_model.h"
#include "pacdiff/tensor.h"

namespace pacdiff {

struct ClassifierConfig {
  // The last hidden width is the feature dimension of a clean classifier.
  std::vector<std::size_t> hidden = {32, 16};
  Activation activation = Activation::kRelu;
};

// Binary classifier producing two logits. A noisy classifier additionally
// takes one_hot(level) and is trained on inputs perturbed at that level; a
// clean classifier sees raw samples and doubles as the feature extractor.
class ClassifierNet {
 public:
  // `schedule` set => noisy variant conditioned on its levels.
  static ClassifierNet Create(std::size_t sample_dim,
                              const std::optional<NoiseSchedule>& schedule,
                              const ClassifierConfig& cfg,
                              std::uint64_t seed);

  bool noisy() const { return schedule_.has_value(); }
  std::size_t sample_dim() const { return sample_dim_; }
  std::size_t feature_dim() const { return config_.hidden.back(); }
  const std::optional<NoiseSchedule>& schedule() const { return schedule_; }
  const ClassifierConfig& config() const { return config_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }

  // Network input for x [B, D]: x itself, or x with the level one-hot. A
  // level is required exactly when the classifier is noisy.
  Tensor Input(const Tensor& x, std::optional<std::size_t> level) const;
  Tensor Input(const Tensor& x, std::span<const std::size_t> levels) const;

  Tensor Logits(const Tensor& x, std::optional<std::size_t> level) const;

  // Directory layout: network.csv, optional schedule.csv, layer_<i>.csv.
  void Save(const std::filesystem::path& dir) const;
  static ClassifierNet Load(const std::filesystem::path& dir);

  friend bool operator==(const ClassifierNet& a, const ClassifierNet& b) {
    return a.mlp_ == b.mlp_ && a.sample_dim_ == b.sample_dim_ &&
           a.schedule_ == b.schedule_;
  }

 private:
  Mlp mlp_;
  std::size_t sample_dim_ = 0;
  std::optional<NoiseSchedule> schedule_;
  ClassifierConfig config_;
};

// Cross-entropy SGD. With a schedule, each batch element is perturbed at a
// uniformly drawn level and the network is conditioned on that level.
ClassifierNet TrainClassifier(const LabeledDataset& data,
                              const std::optional<NoiseSchedule>& schedule,
                              const ClassifierConfig& net_cfg,
                              const TrainConfig& train,
                              std::vector<double>* losses = nullptr);

// log c(y | x) per row of x [B, D].
std::vector<double> LogProb(const ClassifierNet& net, const Tensor& x,
                            std::optional<std::size_t> level,
                            std::span<const int> labels);
double LogProb(const ClassifierNet& net, std::span<const double> x,
               std::optional<std::size_t> level, int y);

// d/dx log c(y_b | x_b) for every row, by reverse mode with parameters held
// fixed. Rows do not interact.
Tensor GradLogProbInput(const ClassifierNet& net, const Tensor& x,
                        std::optional<std::size_t> level,
                        std::span<const int> labels);

// Argmax label per row (ties to 0).
std::vector<int> Predict(const ClassifierNet& net, const Tensor& x,
                         std::optional<std::size_t> level = std::nullopt);
double Accuracy(const ClassifierNet& net, const LabeledDataset& data,
                std::optional<std::size_t> level = std::nullopt);

// Accuracy on copies of `data` perturbed at `level` with a fixed noise seed.
double NoisyAccuracy(const ClassifierNet& net, const LabeledDataset& data,
                     std::size_t level, std::uint64_t seed);

// Penultimate activations [B, feature_dim]. Rejects noisy classifiers.
Tensor Features(const ClassifierNet& net, const Tensor& x);

}  // namespace pacdiff

#endif  // PACDIFF_CLASSIFIER_H_
