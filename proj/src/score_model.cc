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

#include "pacdiff/score_model.h"

#include <cmath>
#include <stdexcept>

#include "pacdiff/csv_io.h"
#include "pacdiff/kernels.h"

namespace pacdiff {

NoiseSchedule::NoiseSchedule(std::vector<double> levels)
    : levels_(std::move(levels)) {
  if (levels_.empty())
    throw std::invalid_argument("noise schedule: no levels");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!(levels_[i] > 0.0) || !std::isfinite(levels_[i]))
      throw std::invalid_argument("noise schedule: levels must be positive");
    if (i > 0 && !(levels_[i] < levels_[i - 1]))
      throw std::invalid_argument(
          "noise schedule: levels must strictly decrease");
  }
  if (levels_.size() > 2) {
    const double ratio = levels_[1] / levels_[0];
    for (std::size_t i = 2; i < levels_.size(); ++i)
      if (std::abs(levels_[i] / levels_[i - 1] - ratio) > 1e-12)
        throw std::invalid_argument("noise schedule: not geometric");
  }
}

NoiseSchedule NoiseSchedule::Geometric(double largest, double smallest,
                                       std::size_t count) {
  if (count == 0) throw std::invalid_argument("noise schedule: no levels");
  if (count == 1) return NoiseSchedule({largest});
  if (!(largest > smallest))
    throw std::invalid_argument(
        "noise schedule: largest level must exceed the smallest");
  std::vector<double> levels(count);
  const double log_ratio =
      std::log(smallest / largest) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    levels[i] = largest * std::exp(log_ratio * static_cast<double>(i));
  levels.back() = smallest;
  return NoiseSchedule(std::move(levels));
}

double RrConfig::TrueSourceProbability() const {
  if (k_neighbors == 0) throw std::invalid_argument("rr: k must be >= 1");
  if (std::isinf(epsilon)) return 1.0;
  // e^eps / (e^eps + k - 1) = 1 / (1 + (k - 1) e^-eps)
  return 1.0 / (1.0 + static_cast<double>(k_neighbors - 1) *
                          std::exp(-epsilon));
}

double RrConfig::DecoyProbability() const {
  if (k_neighbors <= 1) return 0.0;
  return (1.0 - TrueSourceProbability()) /
         static_cast<double>(k_neighbors - 1);
}

Tensor Perturb(const Tensor& x, double delta, Rng& rng) {
  if (!(delta >= 0.0))
    throw std::invalid_argument("perturb: delta must be >= 0");
  Tensor z = Gaussian(rng, x.shape());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + delta * z[i];
  return out;
}

std::size_t RrSelect(std::span<const double> perturbed,
                     std::size_t source_index, const Tensor& dataset,
                     const RrConfig& cfg, Rng& rng) {
  if (cfg.k_neighbors == 0) throw std::invalid_argument("rr: k must be >= 1");
  if (cfg.k_neighbors > dataset.rows())
    throw std::invalid_argument(
        "rr_select: k = " + std::to_string(cfg.k_neighbors) +
        " exceeds dataset size " + std::to_string(dataset.rows()));
  if (source_index >= dataset.rows())
    throw std::out_of_range("rr_select: source index out of range");
  if (cfg.k_neighbors == 1 || std::isinf(cfg.epsilon)) return source_index;

  const double p_true = cfg.TrueSourceProbability();
  if (rng.Uniform() < p_true) return source_index;
  const auto decoys = kernels::KNearest(
      perturbed, {dataset.data().data(), dataset.rows(), dataset.cols()},
      cfg.k_neighbors - 1, source_index);
  return decoys[rng.UniformIndex(decoys.size())];
}

Tensor RecoveryDirection(const Tensor& perturbed, const Tensor& anchor,
                         double delta, bool flip_direction) {
  if (!(delta > 0.0))
    throw std::invalid_argument("recovery_direction: delta must be > 0");
  Tensor d = ops::Scale(ops::Sub(anchor, perturbed), 1.0 / (delta * delta));
  return flip_direction ? ops::Scale(d, -1.0) : d;
}

ScoreNet ScoreNet::Create(std::size_t sample_dim,
                          const NoiseSchedule& schedule,
                          const ScoreNetConfig& cfg, std::uint64_t seed) {
  std::vector<std::size_t> sizes{sample_dim + schedule.size()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(sample_dim);
  Rng rng = Rng::ForStream(seed, 0);
  ScoreNet net;
  net.mlp_ = Mlp::Create(sizes, cfg.activation, rng);
  net.sample_dim_ = sample_dim;
  net.schedule_ = schedule;
  net.config_ = cfg;
  return net;
}

Tensor ScoreNet::LevelScale(std::span<const std::size_t> levels) const {
  Tensor scale({levels.size(), sample_dim_});
  for (std::size_t r = 0; r < levels.size(); ++r) {
    const double s = 1.0 / schedule_[levels[r]];
    for (double& v : scale.row(r)) v = s;
  }
  return scale;
}

Tensor ScoreNet::Evaluate(const Tensor& x,
                          std::span<const std::size_t> levels) const {
  if (x.rank() != 2 || x.cols() != sample_dim_)
    throw std::invalid_argument("score net: expected [B, " +
                                std::to_string(sample_dim_) + "], got " +
                                x.ShapeString());
  Tensor out = mlp_.Evaluate(ConcatOneHot(x, levels, schedule_.size()));
  if (config_.scale_by_level) out = ops::Mul(out, LevelScale(levels));
  return out;
}

Tensor ScoreNet::Evaluate(const Tensor& x, std::size_t level) const {
  const std::vector<std::size_t> levels(x.rows(), level);
  return Evaluate(x, levels);
}

ScoreNet::Trace ScoreNet::Forward(Tape& tape, const Tensor& x,
                                  std::span<const std::size_t> levels) const {
  const NodeId input = tape.Leaf(ConcatOneHot(x, levels, schedule_.size()));
  Trace trace{mlp_.Forward(tape, input), {}};
  trace.output = trace.mlp.output;
  if (config_.scale_by_level)
    trace.output = tape.Mul(trace.output, tape.Leaf(LevelScale(levels)));
  return trace;
}

void ScoreNet::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  WriteKeyValues(dir / "network.csv",
                 {{"kind", "score"},
                  {"sample_dim", std::to_string(sample_dim_)},
                  {"hidden", FormatSizeList(config_.hidden)},
                  {"activation", ActivationName(config_.activation)},
                  {"scale_by_level", config_.scale_by_level ? "1" : "0"},
                  {"layers", std::to_string(mlp_.num_layers())}});
  WriteMatrixCsv(dir / "schedule.csv", Tensor::Vector(schedule_.levels()));
  mlp_.Save(dir);
}

ScoreNet ScoreNet::Load(const std::filesystem::path& dir) {
  auto kv = ReadKeyValues(dir / "network.csv");
  if (kv["kind"] != "score")
    throw FormatError((dir / "network.csv").string() +
                      ": not a score network");
  ScoreNet net;
  try {
    net.sample_dim_ = std::stoul(kv.at("sample_dim"));
    net.config_.hidden = ParseSizeList(kv.at("hidden"));
    net.config_.activation = ParseActivation(kv.at("activation"));
    net.config_.scale_by_level = kv.at("scale_by_level") == "1";
    const Tensor levels = ReadMatrixCsv(dir / "schedule.csv");
    net.schedule_ = NoiseSchedule(levels.values());
    net.mlp_ = Mlp::Load(dir, std::stoul(kv.at("layers")),
                         net.config_.activation);
  } catch (const std::out_of_range& e) {
    throw FormatError((dir / "network.csv").string() +
                      ": missing field: " + e.what());
  }
  if (net.mlp_.input_dim() != net.sample_dim_ + net.schedule_.size() ||
      net.mlp_.output_dim() != net.sample_dim_)
    throw FormatError(dir.string() + ": layer shapes do not match metadata");
  return net;
}

DsmBatch SampleDsmBatch(const LabeledDataset& data,
                        std::span<const std::size_t> sources,
                        const NoiseSchedule& schedule, const RrConfig& rr,
                        bool flip_direction, Rng& rng) {
  if (sources.empty()) throw std::invalid_argument("dsm: empty batch");
  const std::size_t b = sources.size();
  const std::size_t d = data.dim();
  DsmBatch batch{Tensor({b, d}), Tensor({b, d}),
                 std::vector<std::size_t>(b), {sources.begin(), sources.end()},
                 std::vector<std::size_t>(b)};
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t level = rng.UniformIndex(schedule.size());
    const double delta = schedule[level];
    const Tensor x = Tensor::Vector(std::vector<double>(
        data.samples.row(sources[i]).begin(),
        data.samples.row(sources[i]).end()));
    const Tensor perturbed = Perturb(x, delta, rng);
    const std::size_t anchor =
        RrSelect(perturbed.data(), sources[i], data.samples, rr, rng);
    const Tensor anchor_row = Tensor::Vector(std::vector<double>(
        data.samples.row(anchor).begin(), data.samples.row(anchor).end()));
    const Tensor target =
        RecoveryDirection(perturbed, anchor_row, delta, flip_direction);
    std::copy(perturbed.data().begin(), perturbed.data().end(),
              batch.perturbed.row(i).begin());
    std::copy(target.data().begin(), target.data().end(),
              batch.targets.row(i).begin());
    batch.levels[i] = level;
    batch.anchors[i] = anchor;
  }
  return batch;
}

DsmLossResult DsmLoss(const ScoreNet& net, const DsmBatch& batch,
                      const NoiseSchedule& schedule) {
  const std::size_t b = batch.perturbed.rows();
  if (b == 0) throw std::invalid_argument("dsm: empty batch");
  Tape tape;
  const auto trace = net.Forward(tape, batch.perturbed, batch.levels);
  Tensor weights(batch.targets.shape());
  for (std::size_t r = 0; r < b; ++r) {
    const double delta = schedule[batch.levels[r]];
    for (double& v : weights.row(r)) v = delta;
  }
  const NodeId residual =
      tape.Sub(trace.output, tape.Leaf(batch.targets));
  const NodeId weighted = tape.Mul(residual, tape.Leaf(std::move(weights)));
  const NodeId loss = tape.Scale(tape.Sum(tape.Mul(weighted, weighted)),
                                 0.5 / static_cast<double>(b));
  const Gradients grads = tape.Backward(loss);
  DsmLossResult result{tape.Value(loss).item(), {}};
  for (NodeId p : trace.mlp.params) result.grads.push_back(grads[p]);
  return result;
}

ScoreNet TrainScore(const LabeledDataset& data, const NoiseSchedule& schedule,
                    const RrConfig& rr, const ScoreNetConfig& net_cfg,
                    const TrainConfig& train, bool flip_direction,
                    std::vector<double>* losses) {
  ValidateDataset(data);
  if (rr.k_neighbors > data.size())
    throw std::invalid_argument("train_score: rr.k exceeds dataset size");
  ScoreNet net = ScoreNet::Create(data.dim(), schedule, net_cfg, train.seed);
  Rng rng = Rng::ForStream(train.seed, 1);
  std::vector<std::size_t> sources(train.batch);
  for (std::size_t step = 0; step < train.steps; ++step) {
    for (auto& s : sources) s = rng.UniformIndex(data.size());
    const DsmBatch batch =
        SampleDsmBatch(data, sources, schedule, rr, flip_direction, rng);
    const DsmLossResult res = DsmLoss(net, batch, schedule);
    if (!std::isfinite(res.loss))
      throw std::runtime_error("train_score: loss is not finite at step " +
                               std::to_string(step));
    if (losses) losses->push_back(res.loss);
    auto& layers = net.mlp().mutable_layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto w = layers[i].weight.data();
      auto bias = layers[i].bias.data();
      const Tensor& gw = res.grads[2 * i];
      const Tensor& gb = res.grads[2 * i + 1];
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= train.lr * gw[k];
      for (std::size_t k = 0; k < bias.size(); ++k)
        bias[k] -= train.lr * gb[k];
    }
  }
  return net;
}

NoiseSchedule DefaultSchedule(const LabeledDataset& data, std::size_t count,
                              double smallest) {
  return NoiseSchedule::Geometric(MaxPairwiseDistance(data) / 2.0, smallest,
                                  count);
}

void WriteLossLog(const std::filesystem::path& path,
                  std::span<const double> losses) {
  CsvTable table{{"step", "loss"}, {}};
  for (std::size_t i = 0; i < losses.size(); ++i)
    table.rows.push_back({std::to_string(i), FormatDouble(losses[i])});
  WriteCsvTable(path, table);
}

}  // namespace pacdiff
