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

#ifndef PACDIFF_DATASETS_H_
#define PACDIFF_DATASETS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pacdiff/tensor.h"

namespace pacdiff {

// Samples with a balanced binary attribute.
struct LabeledDataset {
  std::string name;
  std::vector<std::size_t> sample_shape;  // {2} for points, {side, side}
  Tensor samples;                         // [n, prod(sample_shape)]
  std::vector<int> labels;                // each 0 or 1

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return samples.cols(); }
  bool is_image() const { return sample_shape.size() == 2; }
  Tensor Sample(std::size_t i) const;
};

// Throws std::invalid_argument if sizes disagree, a label is outside {0, 1},
// or the classes differ by more than max(1, 0.05 n) samples.
void ValidateDataset(const LabeledDataset& data);

// Equal-weight mixture of `components` isotropic Gaussians with means evenly
// spaced on a circle of `radius`; the label of a point is its component
// index mod 2.
struct MixtureSpec {
  std::size_t components = 2;
  double radius = 2.0;
  double sigma = 0.5;

  std::array<double, 2> Center(std::size_t m) const;
};

// Draws n points. Component assignments are a seeded shuffle of
// i mod components, so every component gets floor or ceil of n/components
// points and the label classes differ by at most one.
LabeledDataset MakeGmm2d(std::uint64_t seed, std::size_t n,
                         const MixtureSpec& spec);
// Component index of each point, in the order MakeGmm2d emits them.
std::vector<std::size_t> Gmm2dComponents(std::uint64_t seed, std::size_t n,
                                         const MixtureSpec& spec);

// side x side glyph faces in [0, 1]: two eye pixels, and a mouth that is an
// upturned arc (label 1, "smile") or a flat segment (label 0). Position,
// intensity and background speckle are jittered per image. Pixel values are
// quantized to the 256 PGM levels so image files round-trip exactly.
LabeledDataset MakeGlyphs(std::uint64_t seed, std::size_t n,
                          std::size_t side = 8);

// Exact score of the mixture convolved with N(0, perturb_sigma^2 I).
std::array<double, 2> AnalyticScoreGmm(const MixtureSpec& spec,
                                       std::span<const double> x,
                                       double perturb_sigma);

// Largest Euclidean distance between any two samples.
double MaxPairwiseDistance(const LabeledDataset& data);

// 2-D data is one CSV file with header "x,y,label". Image data is a
// directory of PGM files plus a "labels.csv" manifest with header
// "filename,label".
void SaveDataset(const LabeledDataset& data, const std::filesystem::path& path);
LabeledDataset LoadDataset(const std::filesystem::path& path);

}  // namespace pacdiff

#endif  // PACDIFF_DATASETS_H_
