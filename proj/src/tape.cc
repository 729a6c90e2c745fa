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

#include <cmath>
#include <stdexcept>

#include "pacdiff/kernels.h"

namespace pacdiff {
namespace {

kernels::MatrixView View(const Tensor& t) {
  return {t.data().data(), t.rows(), t.cols()};
}

void Accumulate(Tensor& into, const Tensor& g) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += g[i];
}

}  // namespace

NodeId Tape::Push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

const Tape::Node& Tape::At(NodeId id) const {
  if (id.index >= nodes_.size())
    throw std::out_of_range("Tape: node id not on this tape");
  return nodes_[id.index];
}

NodeId Tape::Leaf(Tensor value) {
  return Push({.op = OpKind::kLeaf, .value = std::move(value)});
}

NodeId Tape::Add(NodeId a, NodeId b) {
  Tensor v = ops::Add(At(a).value, At(b).value);
  return Push({.op = OpKind::kAdd, .a = a.index, .b = b.index,
               .value = std::move(v)});
}

NodeId Tape::Sub(NodeId a, NodeId b) {
  Tensor v = ops::Sub(At(a).value, At(b).value);
  return Push({.op = OpKind::kSub, .a = a.index, .b = b.index,
               .value = std::move(v)});
}

NodeId Tape::Mul(NodeId a, NodeId b) {
  Tensor v = ops::Mul(At(a).value, At(b).value);
  return Push({.op = OpKind::kMul, .a = a.index, .b = b.index,
               .value = std::move(v)});
}

NodeId Tape::Scale(NodeId a, double s) {
  Tensor v = ops::Scale(At(a).value, s);
  return Push({.op = OpKind::kScale, .a = a.index, .scalar = s,
               .value = std::move(v)});
}

NodeId Tape::Matmul(NodeId a, NodeId b) {
  Tensor v = ops::Matmul(At(a).value, At(b).value);
  return Push({.op = OpKind::kMatmul, .a = a.index, .b = b.index,
               .value = std::move(v)});
}

NodeId Tape::Relu(NodeId a) {
  return Push({.op = OpKind::kRelu, .a = a.index,
               .value = ops::Relu(At(a).value)});
}

NodeId Tape::Tanh(NodeId a) {
  return Push({.op = OpKind::kTanh, .a = a.index,
               .value = ops::Tanh(At(a).value)});
}

NodeId Tape::LogSoftmax(NodeId a) {
  return Push({.op = OpKind::kLogSoftmax, .a = a.index,
               .value = ops::LogSoftmax(At(a).value)});
}

NodeId Tape::GatherLogProb(NodeId log_probs, std::span<const int> labels) {
  Tensor v = ops::GatherLogProb(At(log_probs).value, labels);
  return Push({.op = OpKind::kGatherLogProb, .a = log_probs.index,
               .labels = std::vector<int>(labels.begin(), labels.end()),
               .value = std::move(v)});
}

NodeId Tape::Mse(NodeId a, NodeId b) {
  Tensor v = ops::Mse(At(a).value, At(b).value);
  return Push({.op = OpKind::kMse, .a = a.index, .b = b.index,
               .value = std::move(v)});
}

NodeId Tape::Sum(NodeId a) {
  return Push({.op = OpKind::kSum, .a = a.index,
               .value = ops::Sum(At(a).value)});
}

NodeId Tape::Mean(NodeId a) {
  return Push({.op = OpKind::kMean, .a = a.index,
               .value = ops::Mean(At(a).value)});
}

Gradients Tape::Backward(NodeId output) const {
  const Node& out = At(output);
  if (out.value.size() != 1) {
    throw std::invalid_argument("backward: output " +
                                out.value.ShapeString() + " is not scalar");
  }
  std::vector<Tensor> grads;
  grads.reserve(nodes_.size());
  for (const Node& n : nodes_) grads.emplace_back(n.value.shape());
  grads[output.index][0] = 1.0;

  for (std::size_t idx = output.index + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    const Tensor& g = grads[idx];
    switch (n.op) {
      case OpKind::kLeaf:
        break;
      case OpKind::kAdd: {
        Accumulate(grads[n.a], g);
        Tensor& gb = grads[n.b];
        if (gb.shape() == g.shape()) {
          Accumulate(gb, g);
        } else {
          // Broadcast bias: sum over rows.
          const std::size_t c = gb.size();
          for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t j = 0; j < c; ++j) gb[j] += g[r * c + j];
        }
        break;
      }
      case OpKind::kSub: {
        Accumulate(grads[n.a], g);
        Tensor& gb = grads[n.b];
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
        break;
      }
      case OpKind::kMul: {
        const Tensor& va = nodes_[n.a].value;
        const Tensor& vb = nodes_[n.b].value;
        Tensor& ga = grads[n.a];
        Tensor& gb = grads[n.b];
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * vb[i];
          gb[i] += g[i] * va[i];
        }
        break;
      }
      case OpKind::kScale: {
        Tensor& ga = grads[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.scalar;
        break;
      }
      case OpKind::kMatmul: {
        const Tensor& va = nodes_[n.a].value;
        const Tensor& vb = nodes_[n.b].value;
        Tensor da(va.shape());
        kernels::GemmNT(View(g), View(vb), da.data().data());
        Accumulate(grads[n.a], da);
        Tensor db(vb.shape());
        kernels::GemmTN(View(va), View(g), db.data().data());
        Accumulate(grads[n.b], db);
        break;
      }
      case OpKind::kRelu: {
        const Tensor& va = nodes_[n.a].value;
        Tensor& ga = grads[n.a];
        for (std::size_t i = 0; i < g.size(); ++i)
          if (va[i] > 0.0) ga[i] += g[i];
        break;
      }
      case OpKind::kTanh: {
        Tensor& ga = grads[n.a];
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double t = n.value[i];
          ga[i] += g[i] * (1.0 - t * t);
        }
        break;
      }
      case OpKind::kLogSoftmax: {
        // d/dx_j = g_j - softmax_j * sum_k g_k, per row.
        Tensor& ga = grads[n.a];
        const std::size_t c = n.value.rank() == 1 ? n.value.size()
                                                  : n.value.cols();
        const std::size_t rows = n.value.size() / c;
        for (std::size_t r = 0; r < rows; ++r) {
          double gsum = 0.0;
          for (std::size_t j = 0; j < c; ++j) gsum += g[r * c + j];
          for (std::size_t j = 0; j < c; ++j) {
            const double p = std::exp(n.value[r * c + j]);
            ga[r * c + j] += g[r * c + j] - p * gsum;
          }
        }
        break;
      }
      case OpKind::kGatherLogProb: {
        Tensor& ga = grads[n.a];
        const std::size_t c = ga.cols();
        for (std::size_t r = 0; r < n.labels.size(); ++r)
          ga[r * c + static_cast<std::size_t>(n.labels[r])] += g[r];
        break;
      }
      case OpKind::kMse: {
        const Tensor& va = nodes_[n.a].value;
        const Tensor& vb = nodes_[n.b].value;
        const double s = 2.0 * g[0] / static_cast<double>(va.size());
        Tensor& ga = grads[n.a];
        Tensor& gb = grads[n.b];
        for (std::size_t i = 0; i < va.size(); ++i) {
          const double d = s * (va[i] - vb[i]);
          ga[i] += d;
          gb[i] -= d;
        }
        break;
      }
      case OpKind::kSum: {
        Tensor& ga = grads[n.a];
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
        break;
      }
      case OpKind::kMean: {
        Tensor& ga = grads[n.a];
        const double s = g[0] / static_cast<double>(ga.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s;
        break;
      }
    }
  }
  return Gradients(std::move(grads));
}

std::vector<Tensor> Tape::Replay() const {
  std::vector<Tensor> values;
  values.reserve(nodes_.size());
  for (const Node& n : nodes_) {
    switch (n.op) {
      case OpKind::kLeaf:
        values.push_back(n.value);
        break;
      case OpKind::kAdd:
        values.push_back(ops::Add(values[n.a], values[n.b]));
        break;
      case OpKind::kSub:
        values.push_back(ops::Sub(values[n.a], values[n.b]));
        break;
      case OpKind::kMul:
        values.push_back(ops::Mul(values[n.a], values[n.b]));
        break;
      case OpKind::kScale:
        values.push_back(ops::Scale(values[n.a], n.scalar));
        break;
      case OpKind::kMatmul:
        values.push_back(ops::Matmul(values[n.a], values[n.b]));
        break;
      case OpKind::kRelu:
        values.push_back(ops::Relu(values[n.a]));
        break;
      case OpKind::kTanh:
        values.push_back(ops::Tanh(values[n.a]));
        break;
      case OpKind::kLogSoftmax:
        values.push_back(ops::LogSoftmax(values[n.a]));
        break;
      case OpKind::kGatherLogProb:
        values.push_back(ops::GatherLogProb(values[n.a], n.labels));
        break;
      case OpKind::kMse:
        values.push_back(ops::Mse(values[n.a], values[n.b]));
        break;
      case OpKind::kSum:
        values.push_back(ops::Sum(values[n.a]));
        break;
      case OpKind::kMean:
        values.push_back(ops::Mean(values[n.a]));
        break;
    }
  }
  return values;
}

}  // namespace pacdiff
