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

#include "pacdiff/classifier.h"

#include <cmath>
#include <stdexcept>

#include "pacdiff/csv_io.h"
#include "pacdiff/rng.h"

namespace pacdiff {

ClassifierNet ClassifierNet::Create(
    std::size_t sample_dim, const std::optional<NoiseSchedule>& schedule,
    const ClassifierConfig& cfg, std::uint64_t seed) {
  if (cfg.hidden.empty())
    throw std::invalid_argument("classifier: need at least one hidden layer");
  std::vector<std::size_t> sizes{sample_dim +
                                 (schedule ? schedule->size() : 0)};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2);
  Rng rng = Rng::ForStream(seed, 0);
  ClassifierNet net;
  net.mlp_ = Mlp::Create(sizes, cfg.activation, rng);
  net.sample_dim_ = sample_dim;
  net.schedule_ = schedule;
  net.config_ = cfg;
  return net;
}

Tensor ClassifierNet::Input(const Tensor& x,
                            std::optional<std::size_t> level) const {
  if (!noisy()) {
    if (level) throw std::invalid_argument("clean classifier takes no level");
    return Input(x, std::span<const std::size_t>());
  }
  if (!level) throw std::invalid_argument("noisy classifier needs a level");
  const std::vector<std::size_t> levels(x.rows(), *level);
  return Input(x, levels);
}

Tensor ClassifierNet::Input(const Tensor& x,
                            std::span<const std::size_t> levels) const {
  if (x.rank() != 2 || x.cols() != sample_dim_)
    throw std::invalid_argument("classifier: expected [B, " +
                                std::to_string(sample_dim_) + "], got " +
                                x.ShapeString());
  if (!noisy()) return x;
  return ConcatOneHot(x, levels, schedule_->size());
}

Tensor ClassifierNet::Logits(const Tensor& x,
                             std::optional<std::size_t> level) const {
  return mlp_.Evaluate(Input(x, level));
}

void ClassifierNet::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  WriteKeyValues(dir / "network.csv",
                 {{"kind", noisy() ? "noisy_classifier" : "clean_classifier"},
                  {"sample_dim", std::to_string(sample_dim_)},
                  {"hidden", FormatSizeList(config_.hidden)},
                  {"activation", ActivationName(config_.activation)},
                  {"layers", std::to_string(mlp_.num_layers())}});
  if (schedule_)
    WriteMatrixCsv(dir / "schedule.csv", Tensor::Vector(schedule_->levels()));
  mlp_.Save(dir);
}

ClassifierNet ClassifierNet::Load(const std::filesystem::path& dir) {
  auto kv = ReadKeyValues(dir / "network.csv");
  const std::string kind = kv["kind"];
  if (kind != "noisy_classifier" && kind != "clean_classifier")
    throw FormatError((dir / "network.csv").string() +
                      ": not a classifier network");
  ClassifierNet net;
  try {
    net.sample_dim_ = std::stoul(kv.at("sample_dim"));
    net.config_.hidden = ParseSizeList(kv.at("hidden"));
    net.config_.activation = ParseActivation(kv.at("activation"));
    if (kind == "noisy_classifier")
      net.schedule_ =
          NoiseSchedule(ReadMatrixCsv(dir / "schedule.csv").values());
    net.mlp_ = Mlp::Load(dir, std::stoul(kv.at("layers")),
                         net.config_.activation);
  } catch (const std::out_of_range& e) {
    throw FormatError((dir / "network.csv").string() +
                      ": missing field: " + e.what());
  }
  const std::size_t expected_in =
      net.sample_dim_ + (net.schedule_ ? net.schedule_->size() : 0);
  if (net.mlp_.input_dim() != expected_in || net.mlp_.output_dim() != 2)
    throw FormatError(dir.string() + ": layer shapes do not match metadata");
  return net;
}

ClassifierNet TrainClassifier(const LabeledDataset& data,
                              const std::optional<NoiseSchedule>& schedule,
                              const ClassifierConfig& net_cfg,
                              const TrainConfig& train,
                              std::vector<double>* losses) {
  ValidateDataset(data);
  ClassifierNet net =
      ClassifierNet::Create(data.dim(), schedule, net_cfg, train.seed);
  Rng rng = Rng::ForStream(train.seed, 1);
  const std::size_t d = data.dim();
  std::vector<std::size_t> levels(train.batch);
  std::vector<int> labels(train.batch);
  for (std::size_t step = 0; step < train.steps; ++step) {
    Tensor x({train.batch, d});
    for (std::size_t b = 0; b < train.batch; ++b) {
      const std::size_t idx = rng.UniformIndex(data.size());
      labels[b] = data.labels[idx];
      auto src = data.samples.row(idx);
      auto dst = x.row(b);
      std::copy(src.begin(), src.end(), dst.begin());
      if (schedule) {
        levels[b] = rng.UniformIndex(schedule->size());
        const double delta = (*schedule)[levels[b]];
        for (double& v : dst) v += delta * rng.Gaussian();
      }
    }
    Tape tape;
    const NodeId input = tape.Leaf(net.Input(x, levels));
    const Mlp::Trace trace = net.mlp().Forward(tape, input);
    const NodeId logp = tape.GatherLogProb(tape.LogSoftmax(trace.output),
                                           labels);
    const NodeId loss = tape.Scale(tape.Mean(logp), -1.0);
    const double value = tape.Value(loss).item();
    if (!std::isfinite(value))
      throw std::runtime_error("train_classifier: loss is not finite at step " +
                               std::to_string(step));
    if (losses) losses->push_back(value);
    net.mlp().ApplySgd(tape.Backward(loss), trace, train.lr);
  }
  return net;
}

std::vector<double> LogProb(const ClassifierNet& net, const Tensor& x,
                            std::optional<std::size_t> level,
                            std::span<const int> labels) {
  for (int y : labels)
    if (y != 0 && y != 1)
      throw std::invalid_argument("log_prob: label must be 0 or 1");
  const Tensor lp =
      ops::GatherLogProb(ops::LogSoftmax(net.Logits(x, level)), labels);
  return lp.values();
}

double LogProb(const ClassifierNet& net, std::span<const double> x,
               std::optional<std::size_t> level, int y) {
  const Tensor row({1, x.size()}, std::vector<double>(x.begin(), x.end()));
  const int labels[] = {y};
  return LogProb(net, row, level, labels)[0];
}

Tensor GradLogProbInput(const ClassifierNet& net, const Tensor& x,
                        std::optional<std::size_t> level,
                        std::span<const int> labels) {
  for (int y : labels)
    if (y != 0 && y != 1)
      throw std::invalid_argument("log_prob: label must be 0 or 1");
  Tape tape;
  const NodeId input = tape.Leaf(net.Input(x, level));
  const Mlp::Trace trace = net.mlp().Forward(tape, input);
  const NodeId total =
      tape.Sum(tape.GatherLogProb(tape.LogSoftmax(trace.output), labels));
  const Gradients grads = tape.Backward(total);
  const Tensor& g = grads[input];
  if (!net.noisy()) return g;
  Tensor out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto src = g.row(r);
    std::copy(src.begin(), src.begin() + x.cols(), out.row(r).begin());
  }
  return out;
}

std::vector<int> Predict(const ClassifierNet& net, const Tensor& x,
                         std::optional<std::size_t> level) {
  const Tensor logits = net.Logits(x, level);
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    out[r] = logits.at(r, 1) > logits.at(r, 0) ? 1 : 0;
  return out;
}

double Accuracy(const ClassifierNet& net, const LabeledDataset& data,
                std::optional<std::size_t> level) {
  const std::vector<int> pred = Predict(net, data.samples, level);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    hits += pred[i] == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double NoisyAccuracy(const ClassifierNet& net, const LabeledDataset& data,
                     std::size_t level, std::uint64_t seed) {
  if (!net.noisy())
    throw std::invalid_argument("noisy_accuracy: classifier is clean");
  Rng rng(seed);
  LabeledDataset noisy = data;
  noisy.samples = Perturb(data.samples, (*net.schedule())[level], rng);
  return Accuracy(net, noisy, level);
}

Tensor Features(const ClassifierNet& net, const Tensor& x) {
  if (net.noisy())
    throw std::invalid_argument(
        "features: the feature map must come from a clean classifier");
  return net.mlp().LastHidden(net.Input(x, std::nullopt));
}

}  // namespace pacdiff
