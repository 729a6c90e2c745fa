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

#ifndef PACDIFF_TENSOR_H_
#define PACDIFF_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pacdiff {

// Dense row-major array of doubles. Scalars are stored with shape {1}.
//
// Most of the code base works with rank-1 vectors and rank-2 matrices whose
// rows are independent samples; higher ranks are only used to carry image
// shapes through I/O.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor Scalar(double value);
  static Tensor Vector(std::vector<double> values);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);
  static Tensor FromRows(
      std::initializer_list<std::initializer_list<double>> rows);
  static Tensor Identity(std::size_t n);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Leading dimension and the product of the remaining ones.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  // Scalar value of a single-element tensor.
  double item() const;

  bool AllFinite() const;
  Tensor Reshaped(std::vector<std::size_t> shape) const;
  Tensor Transposed() const;
  std::string ShapeString() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string ShapeToString(const std::vector<std::size_t>& shape);
std::size_t ShapeSize(const std::vector<std::size_t>& shape);

double FrobeniusNorm(const Tensor& t);
double MaxAbsDiff(const Tensor& a, const Tensor& b);

// Stacks equal-length vectors as the rows of a matrix.
Tensor StackRows(std::span<const std::vector<double>> rows);
// Copies selected rows of a rank-2 tensor.
Tensor GatherRows(const Tensor& m, std::span<const std::size_t> indices);

// Forward-only primitive operations. Each one validates shapes and throws
// std::invalid_argument naming both shapes on mismatch. The autodiff tape
// records these same functions, so traced and untraced evaluation agree
// bit-for-bit.
namespace ops {

// Elementwise a + b. A rank-1 `b` whose length equals a.cols() is
// broadcast over the rows of a rank-2 `a`.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
// Elementwise product; shapes must match exactly.
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double s);
// [m,k] x [k,n] -> [m,n].
Tensor Matmul(const Tensor& a, const Tensor& b);
Tensor Relu(const Tensor& a);
Tensor Tanh(const Tensor& a);
// Row-wise log-softmax of a rank-2 tensor (a rank-1 tensor is one row).
Tensor LogSoftmax(const Tensor& a);
// Picks log_probs[i, labels[i]] for each row; result has shape {rows}.
Tensor GatherLogProb(const Tensor& log_probs, std::span<const int> labels);
// mean((a - b)^2) over all elements, shape {1}.
Tensor Mse(const Tensor& a, const Tensor& b);
Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);

}  // namespace ops
}  // namespace pacdiff

#endif  // PACDIFF_TENSOR_H_
