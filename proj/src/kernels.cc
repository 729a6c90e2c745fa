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

#include "pacdiff/kernels.h"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>

#ifdef PACDIFF_HAVE_OPENMP
#include <omp.h>
#endif

namespace pacdiff::kernels {
namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 15;

// Rows are processed in blocks of kBlock so each loaded b element feeds
// several accumulators. Every output element still sees the same sequence
// of multiply-adds in ascending p, whatever the blocking or threading.
constexpr std::size_t kBlock = 4;

// Output rows [i0, i0 + count) of a*b, count <= kBlock.
inline void GemmBlock(MatrixView a, MatrixView b, std::size_t i0,
                      std::size_t count, double* c) {
  const std::size_t n = b.cols;
  double* out = c + i0 * n;
  std::fill(out, out + count * n, 0.0);
  if (count == kBlock) {
    double* o0 = out;
    double* o1 = out + n;
    double* o2 = out + 2 * n;
    double* o3 = out + 3 * n;
    const double* a0 = a.data + i0 * a.cols;
    for (std::size_t p = 0; p < a.cols; ++p) {
      const double v0 = a0[p];
      const double v1 = a0[a.cols + p];
      const double v2 = a0[2 * a.cols + p];
      const double v3 = a0[3 * a.cols + p];
      const double* brow = b.data + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = brow[j];
        o0[j] += v0 * bv;
        o1[j] += v1 * bv;
        o2[j] += v2 * bv;
        o3[j] += v3 * bv;
      }
    }
    return;
  }
  for (std::size_t r = 0; r < count; ++r) {
    const double* arow = a.data + (i0 + r) * a.cols;
    double* o = out + r * n;
    for (std::size_t p = 0; p < a.cols; ++p) {
      const double av = arow[p];
      const double* brow = b.data + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
    }
  }
}

// Output rows [i0, i0 + count) of a^T b: row i sums a[r,i] * b[r,:] over r
// ascending.
inline void GemmTNBlock(MatrixView a, MatrixView b, std::size_t i0,
                        std::size_t count, double* c) {
  const std::size_t n = b.cols;
  double* out = c + i0 * n;
  std::fill(out, out + count * n, 0.0);
  if (count == kBlock) {
    double* o0 = out;
    double* o1 = out + n;
    double* o2 = out + 2 * n;
    double* o3 = out + 3 * n;
    for (std::size_t r = 0; r < a.rows; ++r) {
      const double* arow = a.data + r * a.cols + i0;
      const double v0 = arow[0];
      const double v1 = arow[1];
      const double v2 = arow[2];
      const double v3 = arow[3];
      const double* brow = b.data + r * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = brow[j];
        o0[j] += v0 * bv;
        o1[j] += v1 * bv;
        o2[j] += v2 * bv;
        o3[j] += v3 * bv;
      }
    }
    return;
  }
  for (std::size_t k = 0; k < count; ++k) {
    double* o = out + k * n;
    for (std::size_t r = 0; r < a.rows; ++r) {
      const double av = a.data[r * a.cols + i0 + k];
      const double* brow = b.data + r * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
    }
  }
}

inline std::size_t NumBlocks(std::size_t rows) {
  return (rows + kBlock - 1) / kBlock;
}

inline std::size_t BlockSize(std::size_t rows, std::size_t block) {
  return std::min(kBlock, rows - block * kBlock);
}

// b^T, so a*b^T can reuse GemmBlock.
inline std::vector<double> Transposed(MatrixView b) {
  std::vector<double> t(b.rows * b.cols);
  for (std::size_t r = 0; r < b.rows; ++r)
    for (std::size_t c = 0; c < b.cols; ++c)
      t[c * b.rows + r] = b.data[r * b.cols + c];
  return t;
}

inline void DistanceRow(MatrixView q, MatrixView refs, std::size_t i,
                        double* out) {
  const double* qrow = q.data + i * q.cols;
  for (std::size_t j = 0; j < refs.rows; ++j) {
    const double* rrow = refs.data + j * refs.cols;
    double acc = 0.0;
    for (std::size_t p = 0; p < q.cols; ++p) {
      const double diff = qrow[p] - rrow[p];
      acc += diff * diff;
    }
    out[i * refs.rows + j] = acc;
  }
}

inline std::size_t NearestRow(MatrixView q, MatrixView refs, std::size_t i) {
  const double* qrow = q.data + i * q.cols;
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < refs.rows; ++j) {
    const double* rrow = refs.data + j * refs.cols;
    double acc = 0.0;
    for (std::size_t p = 0; p < q.cols; ++p) {
      const double diff = qrow[p] - rrow[p];
      acc += diff * diff;
    }
    if (acc < best_dist) {
      best_dist = acc;
      best = j;
    }
  }
  return best;
}

}  // namespace

namespace serial {

void Gemm(MatrixView a, MatrixView b, double* c) {
  for (std::size_t k = 0; k < NumBlocks(a.rows); ++k)
    GemmBlock(a, b, k * kBlock, BlockSize(a.rows, k), c);
}

void GemmNT(MatrixView a, MatrixView b, double* c) {
  const std::vector<double> bt = Transposed(b);
  const MatrixView btv{bt.data(), b.cols, b.rows};
  for (std::size_t k = 0; k < NumBlocks(a.rows); ++k)
    GemmBlock(a, btv, k * kBlock, BlockSize(a.rows, k), c);
}

void GemmTN(MatrixView a, MatrixView b, double* c) {
  for (std::size_t k = 0; k < NumBlocks(a.cols); ++k)
    GemmTNBlock(a, b, k * kBlock, BlockSize(a.cols, k), c);
}

void SquaredDistances(MatrixView queries, MatrixView refs, double* out) {
  for (std::size_t i = 0; i < queries.rows; ++i)
    DistanceRow(queries, refs, i, out);
}

std::vector<std::size_t> NearestIndices(MatrixView queries, MatrixView refs) {
  std::vector<std::size_t> result(queries.rows);
  for (std::size_t i = 0; i < queries.rows; ++i)
    result[i] = NearestRow(queries, refs, i);
  return result;
}

}  // namespace serial

void Gemm(MatrixView a, MatrixView b, double* c) {
  const auto blocks = static_cast<std::int64_t>(NumBlocks(a.rows));
#pragma omp parallel for schedule(static) if (a.rows * a.cols * b.cols > kParallelThreshold)
  for (std::int64_t k = 0; k < blocks; ++k)
    GemmBlock(a, b, k * kBlock, BlockSize(a.rows, k), c);
}

void GemmNT(MatrixView a, MatrixView b, double* c) {
  const std::vector<double> bt = Transposed(b);
  const MatrixView btv{bt.data(), b.cols, b.rows};
  const auto blocks = static_cast<std::int64_t>(NumBlocks(a.rows));
#pragma omp parallel for schedule(static) if (a.rows * a.cols * b.rows > kParallelThreshold)
  for (std::int64_t k = 0; k < blocks; ++k)
    GemmBlock(a, btv, k * kBlock, BlockSize(a.rows, k), c);
}

void GemmTN(MatrixView a, MatrixView b, double* c) {
  const auto blocks = static_cast<std::int64_t>(NumBlocks(a.cols));
#pragma omp parallel for schedule(static) if (a.rows * a.cols * b.cols > kParallelThreshold)
  for (std::int64_t k = 0; k < blocks; ++k)
    GemmTNBlock(a, b, k * kBlock, BlockSize(a.cols, k), c);
}

void SquaredDistances(MatrixView queries, MatrixView refs, double* out) {
  const auto rows = static_cast<std::int64_t>(queries.rows);
#pragma omp parallel for schedule(static) if (queries.rows * refs.rows * refs.cols > kParallelThreshold)
  for (std::int64_t i = 0; i < rows; ++i) DistanceRow(queries, refs, i, out);
}

std::vector<std::size_t> NearestIndices(MatrixView queries, MatrixView refs) {
  std::vector<std::size_t> result(queries.rows);
  const auto rows = static_cast<std::int64_t>(queries.rows);
#pragma omp parallel for schedule(static) if (queries.rows * refs.rows * refs.cols > kParallelThreshold)
  for (std::int64_t i = 0; i < rows; ++i)
    result[i] = NearestRow(queries, refs, i);
  return result;
}

std::vector<std::size_t> KNearest(std::span<const double> query,
                                  MatrixView refs, std::size_t k,
                                  std::size_t exclude) {
  std::vector<double> dist(refs.rows);
  for (std::size_t j = 0; j < refs.rows; ++j) {
    const double* rrow = refs.data + j * refs.cols;
    double acc = 0.0;
    for (std::size_t p = 0; p < refs.cols; ++p) {
      const double diff = query[p] - rrow[p];
      acc += diff * diff;
    }
    dist[j] = acc;
  }
  std::vector<std::size_t> order;
  order.reserve(refs.rows);
  for (std::size_t j = 0; j < refs.rows; ++j)
    if (j != exclude) order.push_back(j);
  k = std::min(k, order.size());
  auto by_distance = [&](std::size_t x, std::size_t y) {
    return dist[x] < dist[y] || (dist[x] == dist[y] && x < y);
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    by_distance);
  order.resize(k);
  return order;
}

int MaxThreads() {
#ifdef PACDIFF_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace pacdiff::kernels
