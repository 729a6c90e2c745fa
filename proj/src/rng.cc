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

#include "pacdiff/rng.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pacdiff {
namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng Rng::ForStream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(Mix64(seed ^ Mix64((stream + 1) * kGolden)));
}

std::uint64_t Rng::NextU64() {
  state_ += kGolden;
  return Mix64(state_);
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::UniformIndex(std::size_t n) {
  if (n == 0) throw std::invalid_argument("UniformIndex: n must be positive");
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = NextU64();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

std::pair<double, double> Rng::GaussianPair() {
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

double Rng::Gaussian() { return GaussianPair().first; }

void Rng::FillGaussian(std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    auto [a, b] = GaussianPair();
    out[i] = a;
    out[i + 1] = b;
  }
  if (i < out.size()) out[i] = GaussianPair().first;
}

Tensor Gaussian(Rng& rng, std::vector<std::size_t> shape) {
  if (shape.empty()) throw std::invalid_argument("gaussian: empty shape");
  Tensor t(std::move(shape));
  rng.FillGaussian(t.data());
  return t;
}

}  // namespace pacdiff
