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

// Serial vs. OpenMP kernels. Arg is the row count of the left operand.

#include <benchmark/benchmark.h>

#include <vector>

#include "pacdiff/kernels.h"
#include "pacdiff/rng.h"

namespace {

using pacdiff::kernels::MatrixView;

std::vector<double> RandomMatrix(std::size_t rows, std::size_t cols,
                                 std::uint64_t seed) {
  pacdiff::Rng rng(seed);
  std::vector<double> v(rows * cols);
  rng.FillGaussian(v);
  return v;
}

template <void (*Kernel)(MatrixView, MatrixView, double*)>
void BM_Gemm(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 64;
  const std::size_t m = 64;
  const auto a = RandomMatrix(n, k, 1);
  const auto b = RandomMatrix(k, m, 2);
  std::vector<double> c(n * m);
  for (auto _ : state) {
    Kernel({a.data(), n, k}, {b.data(), k, m}, c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * k * m);
}

template <std::vector<std::size_t> (*Kernel)(MatrixView, MatrixView)>
void BM_Nearest(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t refs = 1000;
  const std::size_t d = 16;
  const auto q = RandomMatrix(n, d, 3);
  const auto r = RandomMatrix(refs, d, 4);
  for (auto _ : state) {
    auto idx = Kernel({q.data(), n, d}, {r.data(), refs, d});
    benchmark::DoNotOptimize(idx.data());
  }
  state.SetItemsProcessed(state.iterations() * n * refs);
}

BENCHMARK(BM_Gemm<pacdiff::kernels::serial::Gemm>)->Arg(64)->Arg(512);
BENCHMARK(BM_Gemm<pacdiff::kernels::Gemm>)->Arg(64)->Arg(512);
BENCHMARK(BM_Nearest<pacdiff::kernels::serial::NearestIndices>)
    ->Arg(100)
    ->Arg(1000);
BENCHMARK(BM_Nearest<pacdiff::kernels::NearestIndices>)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
