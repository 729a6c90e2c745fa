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

#include "pacdiff/datasets.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "pacdiff/csv_io.h"
#include "pacdiff/kernels.h"
#include "pacdiff/rng.h"

namespace pacdiff {
namespace {

constexpr char kManifestName[] = "labels.csv";

int ParseLabel(const std::string& cell, const std::string& where) {
  if (cell == "0") return 0;
  if (cell == "1") return 1;
  throw FormatError(where + ": label must be 0 or 1, got '" + cell + "'");
}

std::string ImageFileName(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%06zu.pgm", i);
  return buf;
}

double Jitter(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.Uniform();
}

}  // namespace

Tensor LabeledDataset::Sample(std::size_t i) const {
  Tensor t(sample_shape);
  auto src = samples.row(i);
  std::copy(src.begin(), src.end(), t.data().begin());
  return t;
}

void ValidateDataset(const LabeledDataset& data) {
  if (data.labels.empty())
    throw std::invalid_argument("dataset '" + data.name + "' is empty");
  if (data.samples.rank() != 2 || data.samples.rows() != data.labels.size())
    throw std::invalid_argument("dataset '" + data.name +
                                "': sample/label count mismatch");
  if (ShapeSize(data.sample_shape) != data.samples.cols())
    throw std::invalid_argument("dataset '" + data.name +
                                "': sample shape does not match rows");
  std::size_t ones = 0;
  for (int y : data.labels) {
    if (y != 0 && y != 1)
      throw std::invalid_argument("dataset '" + data.name +
                                  "': label outside {0,1}");
    ones += static_cast<std::size_t>(y);
  }
  const std::size_t n = data.labels.size();
  const std::size_t zeros = n - ones;
  const std::size_t gap = ones > zeros ? ones - zeros : zeros - ones;
  const double allowed = std::max(1.0, 0.05 * static_cast<double>(n));
  if (static_cast<double>(gap) > allowed)
    throw std::invalid_argument("dataset '" + data.name +
                                "': labels are not balanced (" +
                                std::to_string(ones) + " vs " +
                                std::to_string(zeros) + ")");
}

std::array<double, 2> MixtureSpec::Center(std::size_t m) const {
  const double angle =
      2.0 * std::numbers::pi * static_cast<double>(m) /
      static_cast<double>(components);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::vector<std::size_t> Gmm2dComponents(std::uint64_t seed, std::size_t n,
                                         const MixtureSpec& spec) {
  if (spec.components == 0 || spec.components % 2 != 0)
    throw std::invalid_argument(
        "make_gmm2d: component count must be even and positive, got " +
        std::to_string(spec.components));
  if (n < spec.components)
    throw std::invalid_argument("make_gmm2d: n must be at least the "
                                "component count");
  if (!(spec.sigma >= 0.0) || !(spec.radius >= 0.0))
    throw std::invalid_argument("make_gmm2d: radius and sigma must be >= 0");
  Rng rng = Rng::ForStream(seed, 0);
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = i % spec.components;
  Shuffle(comp, rng);
  return comp;
}

LabeledDataset MakeGmm2d(std::uint64_t seed, std::size_t n,
                         const MixtureSpec& spec) {
  const std::vector<std::size_t> comp = Gmm2dComponents(seed, n, spec);
  Rng rng = Rng::ForStream(seed, 1);
  LabeledDataset data{"gmm2d", {2}, Tensor({n, 2}), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = spec.Center(comp[i]);
    auto [z0, z1] = rng.GaussianPair();
    data.samples.at(i, 0) = c[0] + spec.sigma * z0;
    data.samples.at(i, 1) = c[1] + spec.sigma * z1;
    data.labels[i] = static_cast<int>(comp[i] % 2);
  }
  return data;
}

LabeledDataset MakeGlyphs(std::uint64_t seed, std::size_t n,
                          std::size_t side) {
  if (side < 8)
    throw std::invalid_argument("make_glyphs: side must be >= 8, got " +
                                std::to_string(side));
  if (n == 0 || n % 2 != 0)
    throw std::invalid_argument("make_glyphs: n must be even and positive, "
                                "got " + std::to_string(n));
  Rng label_rng = Rng::ForStream(seed, 0);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  Shuffle(labels, label_rng);

  Rng rng = Rng::ForStream(seed, 1);
  const std::size_t eye_row = side / 4;
  const std::size_t eye_left = side / 4;
  const std::size_t eye_right = side - 1 - side / 4;
  const std::size_t width = side / 2;

  LabeledDataset data{"glyphs", {side, side}, Tensor({n, side * side}),
                      labels};
  for (std::size_t i = 0; i < n; ++i) {
    auto px = data.samples.row(i);
    for (double& v : px) v = Jitter(rng, 0.0, 0.12);
    auto put = [&](std::size_t r, std::size_t c, double v) {
      double& p = px[r * side + c];
      p = std::max(p, v);
    };
    put(eye_row, eye_left, Jitter(rng, 0.7, 1.0));
    put(eye_row, eye_right, Jitter(rng, 0.7, 1.0));

    const std::size_t row = side - 3 + rng.UniformIndex(3) - 1;
    const std::size_t col0 = side / 4 + rng.UniformIndex(3) - 1;
    const double ink = Jitter(rng, 0.6, 1.0);
    for (std::size_t c = col0; c < col0 + width; ++c) put(row, c, ink);
    if (labels[i] == 1) {
      put(row - 1, col0 - 1, ink);
      put(row - 1, col0 + width, ink);
    }
    for (double& v : px) v = QuantizePixel(v);
  }
  return data;
}

std::array<double, 2> AnalyticScoreGmm(const MixtureSpec& spec,
                                       std::span<const double> x,
                                       double perturb_sigma) {
  if (x.size() != 2)
    throw std::invalid_argument("analytic_score_gmm: x must be 2-D");
  const double var = spec.sigma * spec.sigma + perturb_sigma * perturb_sigma;
  if (!(var > 0.0))
    throw std::invalid_argument("analytic_score_gmm: zero total variance");
  std::vector<double> logw(spec.components);
  double mx = -HUGE_VAL;
  for (std::size_t m = 0; m < spec.components; ++m) {
    const auto c = spec.Center(m);
    const double dx = x[0] - c[0];
    const double dy = x[1] - c[1];
    logw[m] = -(dx * dx + dy * dy) / (2.0 * var);
    mx = std::max(mx, logw[m]);
  }
  double total = 0.0;
  std::array<double, 2> acc{0.0, 0.0};
  for (std::size_t m = 0; m < spec.components; ++m) {
    const double w = std::exp(logw[m] - mx);
    const auto c = spec.Center(m);
    total += w;
    acc[0] += w * (c[0] - x[0]);
    acc[1] += w * (c[1] - x[1]);
  }
  return {acc[0] / (total * var), acc[1] / (total * var)};
}

double MaxPairwiseDistance(const LabeledDataset& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = data.samples.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto b = data.samples.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
      }
      best = std::max(best, acc);
    }
  }
  return std::sqrt(best);
}

void SaveDataset(const LabeledDataset& data,
                 const std::filesystem::path& path) {
  ValidateDataset(data);
  CsvTable table;
  if (!data.is_image()) {
    if (data.dim() != 2)
      throw std::invalid_argument("save_dataset: point data must be 2-D");
    table.header = {"x", "y", "label"};
    for (std::size_t i = 0; i < data.size(); ++i)
      table.rows.push_back({FormatDouble(data.samples.at(i, 0)),
                            FormatDouble(data.samples.at(i, 1)),
                            std::to_string(data.labels[i])});
    WriteCsvTable(path, table);
    return;
  }
  std::filesystem::create_directories(path);
  table.header = {"filename", "label"};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string name = ImageFileName(i);
    WritePgm(path / name, data.Sample(i));
    table.rows.push_back({name, std::to_string(data.labels[i])});
  }
  WriteCsvTable(path / kManifestName, table);
}

LabeledDataset LoadDataset(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    const auto manifest = path / kManifestName;
    const CsvTable table = ReadCsvTable(manifest, /*has_header=*/true);
    if (table.header != std::vector<std::string>{"filename", "label"})
      throw FormatError(manifest.string() +
                        ":1: expected header 'filename,label'");
    if (table.rows.empty())
      throw FormatError(manifest.string() + ": empty dataset");
    LabeledDataset data;
    data.name = path.filename().string();
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      const std::string where =
          manifest.string() + ":" + std::to_string(i + 2);
      if (r.size() != 2) throw FormatError(where + ": expected 2 columns");
      const Tensor img = ReadPgm(path / r[0]);
      if (data.sample_shape.empty()) {
        data.sample_shape = img.shape();
      } else if (img.shape() != data.sample_shape) {
        throw FormatError(where + ": image " + r[0] + " has shape " +
                          img.ShapeString() + ", expected " +
                          ShapeToString(data.sample_shape));
      }
      rows.push_back(img.values());
      data.labels.push_back(ParseLabel(r[1], where));
    }
    data.samples = StackRows(rows);
    ValidateDataset(data);
    return data;
  }

  const CsvTable table = ReadCsvTable(path, /*has_header=*/true);
  if (table.header != std::vector<std::string>{"x", "y", "label"})
    throw FormatError(path.string() + ":1: expected header 'x,y,label'");
  if (table.rows.empty()) throw FormatError(path.string() + ": empty dataset");
  LabeledDataset data{path.stem().string(), {2},
                      Tensor({table.rows.size(), 2}), {}};
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::string where = path.string() + ":" + std::to_string(i + 2);
    if (r.size() != 3) throw FormatError(where + ": expected 3 columns");
    data.samples.at(i, 0) = ParseDouble(r[0], where);
    data.samples.at(i, 1) = ParseDouble(r[1], where);
    data.labels.push_back(ParseLabel(r[2], where));
  }
  ValidateDataset(data);
  return data;
}

}  // namespace pacdiff
