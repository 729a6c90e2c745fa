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

#include "pacdiff/mlp.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pacdiff/csv_io.h"

namespace pacdiff {

std::string ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation ParseActivation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Mlp Mlp::Create(std::span<const std::size_t> sizes, Activation act,
                Rng& rng) {
  if (sizes.size() < 2)
    throw std::invalid_argument("Mlp: need at least input and output sizes");
  Mlp net;
  net.activation_ = act;
  const double gain = act == Activation::kRelu ? 2.0 : 1.0;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    DenseLayer layer{Gaussian(rng, {sizes[i], sizes[i + 1]}),
                     Tensor({sizes[i + 1]})};
    const double scale = std::sqrt(gain / static_cast<double>(sizes[i]));
    for (double& w : layer.weight.data()) w *= scale;
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

Tensor Mlp::Activate(const Tensor& t) const {
  return activation_ == Activation::kRelu ? ops::Relu(t) : ops::Tanh(t);
}

NodeId Mlp::Activate(Tape& tape, NodeId n) const {
  return activation_ == Activation::kRelu ? tape.Relu(n) : tape.Tanh(n);
}

Mlp::Trace Mlp::Forward(Tape& tape, NodeId input) const {
  Trace trace{input, input, {}};
  NodeId h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const NodeId w = tape.Leaf(layers_[i].weight);
    const NodeId b = tape.Leaf(layers_[i].bias);
    trace.params.push_back(w);
    trace.params.push_back(b);
    if (i + 1 == layers_.size()) trace.last_hidden = h;
    h = tape.Add(tape.Matmul(h, w), b);
    if (i + 1 < layers_.size()) h = Activate(tape, h);
  }
  trace.output = h;
  return trace;
}

Tensor Mlp::Evaluate(const Tensor& input) const {
  Tensor h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = ops::Add(ops::Matmul(h, layers_[i].weight), layers_[i].bias);
    if (i + 1 < layers_.size()) h = Activate(h);
  }
  return h;
}

Tensor Mlp::LastHidden(const Tensor& input) const {
  Tensor h = input;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
    h = Activate(ops::Add(ops::Matmul(h, layers_[i].weight), layers_[i].bias));
  return h;
}

void Mlp::ApplySgd(const Gradients& grads, const Trace& trace, double lr) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Tensor& gw = grads[trace.params[2 * i]];
    const Tensor& gb = grads[trace.params[2 * i + 1]];
    auto w = layers_[i].weight.data();
    auto b = layers_[i].bias.data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * gw[k];
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= lr * gb[k];
  }
}

bool Mlp::AllFinite() const {
  for (const auto& l : layers_)
    if (!l.weight.AllFinite() || !l.bias.AllFinite()) return false;
  return true;
}

void Mlp::Save(const std::filesystem::path& dir) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const std::size_t fan_in = l.weight.rows();
    const std::size_t fan_out = l.weight.cols();
    Tensor packed({fan_in + 1, fan_out});
    std::copy(l.weight.data().begin(), l.weight.data().end(),
              packed.data().begin());
    std::copy(l.bias.data().begin(), l.bias.data().end(),
              packed.data().begin() + fan_in * fan_out);
    WriteMatrixCsv(dir / ("layer_" + std::to_string(i) + ".csv"), packed);
  }
}

Mlp Mlp::Load(const std::filesystem::path& dir, std::size_t num_layers,
              Activation act) {
  Mlp net;
  net.activation_ = act;
  for (std::size_t i = 0; i < num_layers; ++i) {
    const auto path = dir / ("layer_" + std::to_string(i) + ".csv");
    const Tensor packed = ReadMatrixCsv(path);
    if (packed.rows() < 2)
      throw FormatError(path.string() + ": layer needs weight and bias rows");
    const std::size_t fan_in = packed.rows() - 1;
    const std::size_t fan_out = packed.cols();
    std::vector<double> w(packed.data().begin(),
                          packed.data().begin() + fan_in * fan_out);
    std::vector<double> b(packed.data().begin() + fan_in * fan_out,
                          packed.data().end());
    if (!net.layers_.empty() && net.layers_.back().weight.cols() != fan_in)
      throw FormatError(path.string() + ": fan-in " + std::to_string(fan_in) +
                        " does not match previous layer");
    net.layers_.push_back({Tensor({fan_in, fan_out}, std::move(w)),
                           Tensor({fan_out}, std::move(b))});
  }
  return net;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.activation_ != b.activation_ || a.layers_.size() != b.layers_.size())
    return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i)
    if (!(a.layers_[i].weight == b.layers_[i].weight) ||
        !(a.layers_[i].bias == b.layers_[i].bias))
      return false;
  return true;
}

void WriteKeyValues(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& kv) {
  CsvTable table{{"key", "value"}, {}};
  for (const auto& [k, v] : kv) table.rows.push_back({k, v});
  WriteCsvTable(path, table);
}

std::map<std::string, std::string> ReadKeyValues(
    const std::filesystem::path& path) {
  const CsvTable table = ReadCsvTable(path, /*has_header=*/true);
  std::map<std::string, std::string> kv;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != 2)
      throw FormatError(path.string() + ":" + std::to_string(i + 2) +
                        ": expected key,value");
    kv[table.rows[i][0]] = table.rows[i][1];
  }
  return kv;
}

std::vector<std::size_t> ParseSizeList(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ':')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || v == 0)
      throw std::invalid_argument("invalid layer size list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty())
    throw std::invalid_argument("empty layer size list '" + text + "'");
  return out;
}

std::string FormatSizeList(std::span<const std::size_t> sizes) {
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += ":";
    s += std::to_string(sizes[i]);
  }
  return s;
}

Tensor ConcatOneHot(const Tensor& x, std::span<const std::size_t> levels,
                    std::size_t num_levels) {
  if (x.rank() != 2 || levels.size() != x.rows())
    throw std::invalid_argument("one-hot conditioning: " + x.ShapeString() +
                                " vs " + std::to_string(levels.size()) +
                                " levels");
  const std::size_t d = x.cols();
  Tensor out({x.rows(), d + num_levels});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (levels[r] >= num_levels)
      throw std::out_of_range("one-hot conditioning: level out of range");
    auto src = x.row(r);
    auto dst = out.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[d + levels[r]] = 1.0;
  }
  return out;
}

}  // namespace pacdiff
