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

#ifndef PACDIFF_MLP_H_
#define PACDIFF_MLP_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pacdiff/rng.h"
#include "pacdiff/tape.h"
#include "pacdiff/tensor.h"

namespace pacdiff {

enum class Activation { kRelu, kTanh };

std::string ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

struct DenseLayer {
  Tensor weight;  // [fan_in, fan_out]
  Tensor bias;    // [fan_out]
};

// Fully connected network: activation after every layer but the last.
class Mlp {
 public:
  // sizes = {input, hidden..., output}. Weights ~ N(0, gain / fan_in) with
  // gain 2 for ReLU and 1 for tanh; biases start at zero.
  static Mlp Create(std::span<const std::size_t> sizes, Activation act,
                    Rng& rng);

  struct Trace {
    NodeId output;
    NodeId last_hidden;          // activations feeding the output layer
    std::vector<NodeId> params;  // weight0, bias0, weight1, bias1, ...
  };
  // Records the forward pass on `tape`, registering parameters as leaves.
  Trace Forward(Tape& tape, NodeId input) const;

  // Untraced forward pass; bit-identical to Forward.
  Tensor Evaluate(const Tensor& input) const;
  // Activations of the last hidden layer.
  Tensor LastHidden(const Tensor& input) const;

  // params -= lr * grad for the parameter leaves of a Trace.
  void ApplySgd(const Gradients& grads, const Trace& trace, double lr);

  std::size_t input_dim() const { return layers_.front().weight.rows(); }
  std::size_t output_dim() const { return layers_.back().weight.cols(); }
  std::size_t num_layers() const { return layers_.size(); }
  Activation activation() const { return activation_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  bool AllFinite() const;

  // One CSV per layer, "layer_<i>.csv": fan_in weight rows followed by one
  // bias row.
  void Save(const std::filesystem::path& dir) const;
  static Mlp Load(const std::filesystem::path& dir, std::size_t num_layers,
                  Activation act);

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  Tensor Activate(const Tensor& t) const;
  NodeId Activate(Tape& tape, NodeId n) const;

  std::vector<DenseLayer> layers_;
  Activation activation_ = Activation::kRelu;
};

// Small "key,value" metadata file written next to network parameters.
void WriteKeyValues(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> ReadKeyValues(
    const std::filesystem::path& path);

std::vector<std::size_t> ParseSizeList(const std::string& text);
std::string FormatSizeList(std::span<const std::size_t> sizes);

// Row-wise concatenation of x [B, D] with one-hot(levels) [B, L].
Tensor ConcatOneHot(const Tensor& x, std::span<const std::size_t> levels,
                    std::size_t num_levels);

}  // namespace pacdiff

#endif  // PACDIFF_MLP_H_
