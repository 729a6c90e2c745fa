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

#ifndef PACDIFF_TAPE_H_
#define PACDIFF_TAPE_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pacdiff/tensor.h"

namespace pacdiff {

struct NodeId {
  std::size_t index;
  friend bool operator==(NodeId, NodeId) = default;
};

enum class OpKind {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kScale,
  kMatmul,
  kRelu,
  kTanh,
  kLogSoftmax,
  kGatherLogProb,
  kMse,
  kSum,
  kMean,
};

// Gradient of a scalar output with respect to every node of a tape.
class Gradients {
 public:
  explicit Gradients(std::vector<Tensor> grads) : grads_(std::move(grads)) {}
  const Tensor& operator[](NodeId id) const { return grads_.at(id.index); }

 private:
  std::vector<Tensor> grads_;
};

// Append-only record of primitive operations for first-order reverse-mode
// differentiation. Inputs always precede their consumers, so Backward is a
// single reverse sweep. A tape has one writer; independent tapes may be used
// concurrently.
class Tape {
 public:
  NodeId Leaf(Tensor value);

  NodeId Add(NodeId a, NodeId b);
  NodeId Sub(NodeId a, NodeId b);
  NodeId Mul(NodeId a, NodeId b);
  NodeId Scale(NodeId a, double s);
  NodeId Matmul(NodeId a, NodeId b);
  NodeId Relu(NodeId a);
  NodeId Tanh(NodeId a);
  NodeId LogSoftmax(NodeId a);
  NodeId GatherLogProb(NodeId log_probs, std::span<const int> labels);
  NodeId Mse(NodeId a, NodeId b);
  NodeId Sum(NodeId a);
  NodeId Mean(NodeId a);

  const Tensor& Value(NodeId id) const { return nodes_.at(id.index).value; }
  OpKind Kind(NodeId id) const { return nodes_.at(id.index).op; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a single-element output. Every node receives a
  // gradient; nodes the output does not depend on get zeros.
  Gradients Backward(NodeId output) const;

  // Re-evaluates every non-leaf node from its recorded inputs. Used to check
  // that a tape reproduces its forward values exactly.
  std::vector<Tensor> Replay() const;

 private:
  struct Node {
    OpKind op;
    std::size_t a = 0;
    std::size_t b = 0;
    double scalar = 0.0;
    std::vector<int> labels;
    Tensor value;
  };

  NodeId Push(Node node);
  const Node& At(NodeId id) const;

  std::vector<Node> nodes_;
};

}  // namespace pacdiff

#endif  // PACDIFF_TAPE_H_
