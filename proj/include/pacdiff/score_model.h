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

// Noise-conditioned score network trained by denoising score matching on
// randomized-response-privatized recovery directions.

#ifndef PACDIFF_SCORE_MODEL_H_
#define PACDIFF_SCORE_MODEL_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pacdiff/datasets.h"
#include "pacdiff/mlp.h"
#include "pacdiff/rng.h"
#include "pacdiff/tensor.h"

namespace pacdiff {

// Geometric noise levels, strictly decreasing: levels[0] is the largest.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  // Validates positivity, strict decrease and a constant ratio (1e-12).
  explicit NoiseSchedule(std::vector<double> levels);
  static NoiseSchedule Geometric(double largest, double smallest,
                                 std::size_t count);

  std::size_t size() const { return levels_.size(); }
  double operator[](std::size_t i) const { return levels_.at(i); }
  double smallest() const { return levels_.back(); }
  const std::vector<double>& levels() const { return levels_; }

  friend bool operator==(const NoiseSchedule&,
                         const NoiseSchedule&) = default;

 private:
  std::vector<double> levels_;
};

// Randomized response over nearest neighbors. epsilon may be +infinity.
struct RrConfig {
  double epsilon = HUGE_VAL;
  std::size_t k_neighbors = 1;

  // e^eps / (e^eps + k - 1), evaluated stably (1 at eps = inf).
  double TrueSourceProbability() const;
  // 1 / (e^eps + k - 1): probability of each individual decoy.
  double DecoyProbability() const;
};

// x + delta * z, z ~ N(0, I) drawn with Rng::FillGaussian.
Tensor Perturb(const Tensor& x, double delta, Rng& rng);

// Randomized-response choice of the regression anchor for a perturbed
// sample. Candidates are the true source plus the k - 1 dataset rows
// nearest to `perturbed` (excluding the source; ties to the lowest index).
// Returns the source with probability TrueSourceProbability(), otherwise
// one of the other candidates uniformly. Draws nothing when k == 1 or
// epsilon is infinite.
std::size_t RrSelect(std::span<const double> perturbed,
                     std::size_t source_index, const Tensor& dataset,
                     const RrConfig& cfg, Rng& rng);

// (anchor - perturbed) / delta^2, the score of N(anchor, delta^2 I) at the
// perturbed point. With flip_direction set the result is negated.
Tensor RecoveryDirection(const Tensor& perturbed, const Tensor& anchor,
                         double delta, bool flip_direction = false);

struct ScoreNetConfig {
  std::vector<std::size_t> hidden = {64, 64};
  Activation activation = Activation::kRelu;
  // Divide the network output by the noise level of each row.
  bool scale_by_level = true;

  friend bool operator==(const ScoreNetConfig&,
                         const ScoreNetConfig&) = default;
};

// s_theta(x, level): an MLP over [x, one_hot(level)] whose output has the
// dimension of x, optionally divided by the level's sigma.
class ScoreNet {
 public:
  static ScoreNet Create(std::size_t sample_dim, const NoiseSchedule& schedule,
                         const ScoreNetConfig& cfg, std::uint64_t seed);

  Tensor Evaluate(const Tensor& x, std::span<const std::size_t> levels) const;
  Tensor Evaluate(const Tensor& x, std::size_t level) const;

  struct Trace {
    Mlp::Trace mlp;
    NodeId output;
  };
  Trace Forward(Tape& tape, const Tensor& x,
                std::span<const std::size_t> levels) const;

  std::size_t sample_dim() const { return sample_dim_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const ScoreNetConfig& config() const { return config_; }
  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }

  // Directory layout: network.csv (metadata), schedule.csv, layer_<i>.csv.
  void Save(const std::filesystem::path& dir) const;
  static ScoreNet Load(const std::filesystem::path& dir);

  friend bool operator==(const ScoreNet&, const ScoreNet&) = default;

 private:
  Tensor LevelScale(std::span<const std::size_t> levels) const;

  Mlp mlp_;
  std::size_t sample_dim_ = 0;
  NoiseSchedule schedule_;
  ScoreNetConfig config_;
};

// One denoising score matching mini-batch.
struct DsmBatch {
  Tensor perturbed;                 // [B, D]
  Tensor targets;                   // [B, D] recovery directions
  std::vector<std::size_t> levels;  // per row
  std::vector<std::size_t> sources;
  std::vector<std::size_t> anchors;  // RR-selected dataset rows
};

// For each source index (in order): level ~ U{0..L-1}, perturbation noise,
// then the RR anchor draw.
DsmBatch SampleDsmBatch(const LabeledDataset& data,
                        std::span<const std::size_t> sources,
                        const NoiseSchedule& schedule, const RrConfig& rr,
                        bool flip_direction, Rng& rng);

// (1/B) sum_b 1/2 sigma_b^2 ||d_b - s_theta(x~_b, level_b)||^2.
struct DsmLossResult {
  double loss;
  std::vector<Tensor> grads;  // weight0, bias0, weight1, ...
};
DsmLossResult DsmLoss(const ScoreNet& net, const DsmBatch& batch,
                      const NoiseSchedule& schedule);

struct TrainConfig {
  double lr = 0.01;
  std::size_t steps = 1000;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
};

// Plain fixed-learning-rate SGD on DsmLoss. Batches draw sources uniformly
// with replacement. Throws std::runtime_error if the loss becomes
// non-finite. `losses`, when given, receives the loss of every step.
ScoreNet TrainScore(const LabeledDataset& data, const NoiseSchedule& schedule,
                    const RrConfig& rr, const ScoreNetConfig& net_cfg,
                    const TrainConfig& train, bool flip_direction = false,
                    std::vector<double>* losses = nullptr);

// The default schedule: `count` levels from MaxPairwiseDistance/2 down to
// `smallest`.
NoiseSchedule DefaultSchedule(const LabeledDataset& data, std::size_t count,
                              double smallest);

void WriteLossLog(const std::filesystem::path& path,
                  std::span<const double> losses);

}  // namespace pacdiff

#endif  // PACDIFF_SCORE_MODEL_H_
