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

// Annealed Langevin dynamics with classifier guidance toward a per-chain
// target label.
//
// For level i (largest noise first) with step alpha_i =
// base_step * sigma_i^2 / sigma_L^2, each of the T inner steps is
//
//   x <- x + (alpha_i / 2) s(x, i) + sqrt(alpha_i) z
//          + k * alpha_i * grad_x log c(y | x, i)
//
// i.e. the guidance covariance is taken to be alpha_i * I, the covariance of
// the injected noise. The chain state carries over from one level to the
// next.

#ifndef PACDIFF_SAMPLER_H_
#define PACDIFF_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pacdiff/classifier.h"
#include "pacdiff/rng.h"
#include "pacdiff/score_model.h"
#include "pacdiff/tensor.h"

namespace pacdiff {

// Score field evaluated on a batch of states [B, D] at a schedule level.
class ScoreFunction {
 public:
  virtual ~ScoreFunction() = default;
  virtual Tensor operator()(const Tensor& x, std::size_t level) const = 0;
};

class NetScore final : public ScoreFunction {
 public:
  explicit NetScore(const ScoreNet& net) : net_(net) {}
  Tensor operator()(const Tensor& x, std::size_t level) const override {
    return net_.Evaluate(x, level);
  }

 private:
  const ScoreNet& net_;
};

// Wraps a per-row closed-form score, e.g. AnalyticScoreGmm.
class RowScore final : public ScoreFunction {
 public:
  using Fn = std::function<std::vector<double>(std::span<const double>,
                                               std::size_t level)>;
  explicit RowScore(Fn fn) : fn_(std::move(fn)) {}
  Tensor operator()(const Tensor& x, std::size_t level) const override;

 private:
  Fn fn_;
};

struct SamplerConfig {
  NoiseSchedule schedule;
  std::size_t steps_per_level = 100;
  double base_step = 0.05;
  double gradient_scale = 0.0;
  // Fixed target label, or nullopt to draw y uniformly per chain.
  std::optional<int> target_label;
  std::uint64_t seed = 0;
};

double StepSize(const SamplerConfig& cfg, std::size_t level);

struct SampleBatch {
  Tensor samples;                       // [n, D]
  std::vector<int> labels;              // target label of each chain
  std::vector<std::uint64_t> chain_seeds;
};

// Runs n independent chains. Chain j owns Rng::ForStream(seed, j), from
// which it draws, in order: its target label (when not fixed), its initial
// state x0 ~ N(0, I), and then the noise of every step. Results depend only
// on (seed, cfg, score, guide), not on how chains are batched or threaded.
// `guide` may be null; a noisy guide must be conditioned on cfg.schedule.
// Throws std::runtime_error naming level and step if a state goes
// non-finite.
SampleBatch LangevinSample(const ScoreFunction& score,
                           const ClassifierNet* guide,
                           const SamplerConfig& cfg, std::size_t n,
                           std::size_t sample_dim);

// One update of every row of x using the given noise z. The guidance term
// is added last and skipped entirely when gradient_scale == 0 or guide is
// null.
Tensor LangevinStepWithNoise(const Tensor& x, std::size_t level,
                             const ScoreFunction& score,
                             const ClassifierNet* guide,
                             std::span<const int> labels,
                             const SamplerConfig& cfg, const Tensor& z);

// Same, drawing row r's noise from rngs[r].
Tensor LangevinStep(const Tensor& x, std::size_t level,
                    const ScoreFunction& score, const ClassifierNet* guide,
                    std::span<const int> labels, const SamplerConfig& cfg,
                    std::span<Rng> rngs);

// 2-D samples: CSV with header "sample_id,x,y,y_n,seed". Image samples: a
// directory of PGM files plus "manifest.csv" with "sample_id,y_n,seed".
void SaveSamples(const SampleBatch& batch,
                 const std::vector<std::size_t>& sample_shape,
                 const std::filesystem::path& path);
SampleBatch LoadSamples(const std::filesystem::path& path,
                        std::vector<std::size_t>* sample_shape = nullptr);

}  // namespace pacdiff

#endif  // PACDIFF_SAMPLER_H_
