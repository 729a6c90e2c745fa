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

#ifndef PACDIFF_LINALG_H_
#define PACDIFF_LINALG_H_

#include <span>
#include <vector>

#include "pacdiff/tensor.h"

namespace pacdiff::linalg {

// Eigendecomposition of a symmetric matrix: A = U diag(values) U^T.
struct EigenSystem {
  Tensor vectors;               // [d, d], column j is the j-th eigenvector
  std::vector<double> values;   // descending
};

struct Moments {
  std::vector<double> mean;
  Tensor cov;  // [d, d]
};

// Mean and covariance of the rows of `samples` ([m, d], m >= 2). The
// covariance divides by m, not m - 1.
Moments EmpiricalMoments(const Tensor& samples);
Moments EmpiricalMoments(std::span<const std::vector<double>> samples);

// Cyclic Jacobi rotations until the off-diagonal Frobenius mass is at most
// 1e-12 * ||A||_F. Rejects inputs with ||A - A^T||_F > 1e-9 * ||A||_F; the
// input is symmetrized before rotating.
EigenSystem Eigh(const Tensor& sym);

Tensor Reconstruct(const EigenSystem& eig);

// Symmetric square root of a PSD matrix. Eigenvalues below
// 1e-12 * lambda_max (and small negatives down to -1e-6 * lambda_max) are
// clamped to zero; anything more negative is rejected.
Tensor SqrtPsd(const Tensor& sym);

// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2).
double FrechetDistance(std::span<const double> mu1, const Tensor& sigma1,
                       std::span<const double> mu2, const Tensor& sigma2);

double Trace(const Tensor& m);
Tensor Symmetrized(const Tensor& m);

}  // namespace pacdiff::linalg

#endif  // PACDIFF_LINALG_H_
