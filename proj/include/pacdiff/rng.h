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

#ifndef PACDIFF_RNG_H_
#define PACDIFF_RNG_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pacdiff/tensor.h"

namespace pacdiff {

// Seeded SplitMix64 generator with Box-Muller normals.
//
// Stream layout, relied on by every reproducibility test:
//   * NextU64() advances the state by 0x9E3779B97F4A7C15 and returns the
//     SplitMix64 finalizer of the new state.
//   * Uniform() = (NextU64() >> 11) * 2^-53, in [0, 1).
//   * GaussianPair() draws u1 = 1 - Uniform() (in (0, 1]) and then
//     u2 = Uniform(), and returns (r cos 2*pi*u2, r sin 2*pi*u2) with
//     r = sqrt(-2 ln u1).
//   * Gaussian() returns the first element of a fresh pair; the second is
//     discarded. Nothing is cached between calls.
//   * FillGaussian() consumes pairs in order, writing both elements; for an
//     odd count the final pair's second element is discarded.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent child stream `stream` of `seed`; used to give each chain,
  // run, or worker its own generator regardless of scheduling.
  static Rng ForStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t NextU64();
  double Uniform();
  // Uniform integer in [0, n) by rejection (no modulo bias). n > 0.
  std::size_t UniformIndex(std::size_t n);
  std::pair<double, double> GaussianPair();
  double Gaussian();
  void FillGaussian(std::span<double> out);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Tensor of i.i.d. standard normals filled via Rng::FillGaussian.
Tensor Gaussian(Rng& rng, std::vector<std::size_t> shape);

// Fisher-Yates shuffle driven by Rng::UniformIndex.
template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.UniformIndex(i);
    std::swap(v[i - 1], v[j]);
  }
}

// SplitMix64 finalizer, exposed for seed derivation.
std::uint64_t Mix64(std::uint64_t x);

}  // namespace pacdiff

#endif  // PACDIFF_RNG_H_
