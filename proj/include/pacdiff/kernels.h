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

// Data-parallel inner loops.
//
// Every kernel exists twice: a plain serial reference in `kernels::serial`
// and an OpenMP version in `kernels`. The parallel versions split work over
// output rows only and keep the per-element reduction order of the serial
// reference, so the two produce bit-identical results for any thread count.
// Tests compare them directly; bench/ measures the difference.

#ifndef PACDIFF_KERNELS_H_
#define PACDIFF_KERNELS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace pacdiff::kernels {

// Row-major dense views used by the kernels. Dimensions are validated by
// callers (ops::*), not here.
struct MatrixView {
  const double* data;
  std::size_t rows;
  std::size_t cols;
};

namespace serial {

// c[m,n] = a[m,k] * b[k,n]
void Gemm(MatrixView a, MatrixView b, double* c);
// c[m,n] = a[m,k] * b[n,k]^T
void GemmNT(MatrixView a, MatrixView b, double* c);
// c[k,n] = a[m,k]^T * b[m,n]
void GemmTN(MatrixView a, MatrixView b, double* c);
// out[q,n] = ||queries[q] - refs[n]||^2
void SquaredDistances(MatrixView queries, MatrixView refs, double* out);
// Index of the nearest reference row per query; ties go to the lowest index.
std::vector<std::size_t> NearestIndices(MatrixView queries, MatrixView refs);

}  // namespace serial

void Gemm(MatrixView a, MatrixView b, double* c);
void GemmNT(MatrixView a, MatrixView b, double* c);
void GemmTN(MatrixView a, MatrixView b, double* c);
void SquaredDistances(MatrixView queries, MatrixView refs, double* out);
std::vector<std::size_t> NearestIndices(MatrixView queries, MatrixView refs);

// The k nearest reference rows to `query` (ascending distance, lowest index
// first among ties), skipping `exclude` when it is a valid row index.
std::vector<std::size_t> KNearest(std::span<const double> query,
                                  MatrixView refs, std::size_t k,
                                  std::size_t exclude);

// Number of threads the parallel kernels will use.
int MaxThreads();

}  // namespace pacdiff::kernels

#endif  // PACDIFF_KERNELS_H_
