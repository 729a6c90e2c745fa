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

#include "pacdiff/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "pacdiff/kernels.h"

namespace pacdiff {
namespace {

[[noreturn]] void ShapeError(const char* op, const Tensor& a,
                             const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                              a.ShapeString() + " vs " + b.ShapeString());
}

kernels::MatrixView View(const Tensor& t) {
  return {t.data().data(), t.rows(), t.cols()};
}

template <typename F>
Tensor Map(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace

std::size_t ShapeSize(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {
  for (std::size_t d : shape_)
    if (d == 0) throw std::invalid_argument("Tensor: zero-sized dimension");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t d : shape_)
    if (d == 0) throw std::invalid_argument("Tensor: zero-sized dimension");
  if (ShapeSize(shape_) != data_.size()) {
    throw std::invalid_argument("Tensor: shape " + ShapeToString(shape_) +
                                " does not match " +
                                std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::Scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::Vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("FromRows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::Identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const { return shape_.empty() ? 0 : shape_[0]; }

std::size_t Tensor::cols() const {
  if (shape_.empty()) return 0;
  std::size_t c = 1;
  for (std::size_t i = 1; i < shape_.size(); ++i) c *= shape_[i];
  return c;
}

std::span<double> Tensor::row(std::size_t r) {
  return std::span<double>(data_).subspan(r * cols(), cols());
}

std::span<const double> Tensor::row(std::size_t r) const {
  return std::span<const double>(data_).subspan(r * cols(), cols());
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw std::invalid_argument("item: tensor " + ShapeString() +
                                " is not a scalar");
  }
  return data_[0];
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor Tensor::Reshaped(std::vector<std::size_t> shape) const {
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::Transposed() const {
  if (rank() != 2) {
    throw std::invalid_argument("Transposed: expected a matrix, got " +
                                ShapeString());
  }
  Tensor t({cols(), rows()});
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) t.at(j, i) = at(i, j);
  return t;
}

std::string Tensor::ShapeString() const { return ShapeToString(shape_); }

double FrobeniusNorm(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.data()) acc += v * v;
  return std::sqrt(acc);
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) ShapeError("MaxAbsDiff", a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Tensor StackRows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw std::invalid_argument("StackRows: no rows");
  const std::size_t c = rows[0].size();
  std::vector<double> data;
  data.reserve(rows.size() * c);
  for (const auto& r : rows) {
    if (r.size() != c) {
      throw std::invalid_argument("StackRows: ragged rows (" +
                                  std::to_string(r.size()) + " vs " +
                                  std::to_string(c) + ")");
    }
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), c}, std::move(data));
}

Tensor GatherRows(const Tensor& m, std::span<const std::size_t> indices) {
  std::vector<std::size_t> shape = m.shape();
  shape[0] = indices.size();
  Tensor out(shape);
  const std::size_t c = m.cols();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m.rows())
      throw std::out_of_range("GatherRows: row index out of range");
    std::copy_n(m.row(indices[i]).begin(), c, out.row(i).begin());
  }
  return out;
}

namespace ops {

Tensor Add(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) {
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
  }
  if (a.rank() == 2 && b.rank() == 1 && b.size() == a.cols()) {
    Tensor out(a.shape());
    const std::size_t c = a.cols();
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t j = 0; j < c; ++j)
        out[r * c + j] = a[r * c + j] + b[j];
    return out;
  }
  ShapeError("add", a, b);
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) ShapeError("sub", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) ShapeError("mul", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Tensor Scale(const Tensor& a, double s) {
  return Map(a, [s](double v) { return v * s; });
}

Tensor Matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
    ShapeError("matmul", a, b);
  Tensor out({a.rows(), b.cols()});
  kernels::Gemm(View(a), View(b), out.data().data());
  return out;
}

Tensor Relu(const Tensor& a) {
  return Map(a, [](double v) { return v > 0.0 ? v : 0.0; });
}

Tensor Tanh(const Tensor& a) {
  return Map(a, [](double v) { return std::tanh(v); });
}

Tensor LogSoftmax(const Tensor& a) {
  if (a.rank() != 1 && a.rank() != 2) {
    throw std::invalid_argument("log_softmax: expected rank 1 or 2, got " +
                                a.ShapeString());
  }
  Tensor out(a.shape());
  const std::size_t rows = a.rank() == 1 ? 1 : a.rows();
  const std::size_t c = a.rank() == 1 ? a.size() : a.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = a.data().data() + r * c;
    double mx = in[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, in[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += std::exp(in[j] - mx);
    const double lse = mx + std::log(acc);
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] = in[j] - lse;
  }
  return out;
}

Tensor GatherLogProb(const Tensor& log_probs, std::span<const int> labels) {
  if (log_probs.rank() != 2 || labels.size() != log_probs.rows()) {
    throw std::invalid_argument(
        "gather_log_prob: shape mismatch " + log_probs.ShapeString() +
        " vs labels [" + std::to_string(labels.size()) + "]");
  }
  Tensor out({log_probs.rows()});
  for (std::size_t r = 0; r < log_probs.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= log_probs.cols())
      throw std::out_of_range("gather_log_prob: label out of range");
    out[r] = log_probs.at(r, static_cast<std::size_t>(y));
  }
  return out;
}

Tensor Mse(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) ShapeError("mse", a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return Tensor::Scalar(acc / static_cast<double>(a.size()));
}

Tensor Sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return Tensor::Scalar(acc);
}

Tensor Mean(const Tensor& a) {
  return Tensor::Scalar(Sum(a).item() / static_cast<double>(a.size()));
}

}  // namespace ops
}  // namespace pacdiff
