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

#include "pacdiff/sampler.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pacdiff/csv_io.h"

namespace pacdiff {
namespace {

std::string SampleFileName(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%06zu.pgm", i);
  return buf;
}

std::uint64_t ParseU64(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size())
    throw FormatError(where + ": invalid integer '" + s + "'");
  return v;
}

int ParseBinary(const std::string& s, const std::string& where) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw FormatError(where + ": label must be 0 or 1, got '" + s + "'");
}

}  // namespace

Tensor RowScore::operator()(const Tensor& x, std::size_t level) const {
  Tensor out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const std::vector<double> s = fn_(x.row(r), level);
    if (s.size() != x.cols())
      throw std::invalid_argument("score function returned wrong dimension");
    std::copy(s.begin(), s.end(), out.row(r).begin());
  }
  return out;
}

double StepSize(const SamplerConfig& cfg, std::size_t level) {
  const double ratio = cfg.schedule[level] / cfg.schedule.smallest();
  return cfg.base_step * ratio * ratio;
}

Tensor LangevinStepWithNoise(const Tensor& x, std::size_t level,
                             const ScoreFunction& score,
                             const ClassifierNet* guide,
                             std::span<const int> labels,
                             const SamplerConfig& cfg, const Tensor& z) {
  if (z.shape() != x.shape())
    throw std::invalid_argument("langevin step: noise " + z.ShapeString() +
                                " vs state " + x.ShapeString());
  const double alpha = StepSize(cfg, level);
  const double half = alpha / 2.0;
  const double noise_scale = std::sqrt(alpha);
  const Tensor s = score(x, level);
  Tensor next(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    next[i] = x[i] + half * s[i] + noise_scale * z[i];

  if (guide != nullptr && cfg.gradient_scale != 0.0) {
    std::optional<std::size_t> guide_level;
    if (guide->noisy()) guide_level = level;
    const Tensor g = GradLogProbInput(*guide, x, guide_level, labels);
    const double scale = cfg.gradient_scale * alpha;
    for (std::size_t i = 0; i < x.size(); ++i) next[i] += scale * g[i];
  }
  return next;
}

Tensor LangevinStep(const Tensor& x, std::size_t level,
                    const ScoreFunction& score, const ClassifierNet* guide,
                    std::span<const int> labels, const SamplerConfig& cfg,
                    std::span<Rng> rngs) {
  if (rngs.size() != x.rows())
    throw std::invalid_argument("langevin step: one rng per chain required");
  Tensor z(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) rngs[r].FillGaussian(z.row(r));
  return LangevinStepWithNoise(x, level, score, guide, labels, cfg, z);
}

SampleBatch LangevinSample(const ScoreFunction& score,
                           const ClassifierNet* guide,
                           const SamplerConfig& cfg, std::size_t n,
                           std::size_t sample_dim) {
  if (cfg.steps_per_level == 0)
    throw std::invalid_argument("sampler: steps per level must be >= 1");
  if (!(cfg.base_step > 0.0))
    throw std::invalid_argument("sampler: base step must be > 0");
  if (!std::isfinite(cfg.gradient_scale))
    throw std::invalid_argument("sampler: gradient scale must be finite");
  if (cfg.target_label && *cfg.target_label != 0 && *cfg.target_label != 1)
    throw std::invalid_argument("sampler: target label must be 0 or 1");
  if (n == 0) throw std::invalid_argument("sampler: no chains requested");
  if (guide != nullptr && guide->noisy() &&
      guide->schedule()->size() != cfg.schedule.size())
    throw std::invalid_argument(
        "sampler: guide is conditioned on a different schedule");

  std::vector<Rng> rngs;
  SampleBatch out{Tensor({n, sample_dim}), std::vector<int>(n),
                  std::vector<std::uint64_t>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    rngs.push_back(Rng::ForStream(cfg.seed, j));
    out.chain_seeds[j] = rngs.back().state();
    out.labels[j] = cfg.target_label
                        ? *cfg.target_label
                        : static_cast<int>(rngs.back().UniformIndex(2));
    rngs.back().FillGaussian(out.samples.row(j));
  }

  Tensor& x = out.samples;
  for (std::size_t level = 0; level < cfg.schedule.size(); ++level) {
    for (std::size_t t = 0; t < cfg.steps_per_level; ++t) {
      x = LangevinStep(x, level, score, guide, out.labels, cfg, rngs);
      if (!x.AllFinite())
        throw std::runtime_error("sampler: non-finite state at level " +
                                 std::to_string(level) + ", step " +
                                 std::to_string(t));
    }
  }
  return out;
}

void SaveSamples(const SampleBatch& batch,
                 const std::vector<std::size_t>& sample_shape,
                 const std::filesystem::path& path) {
  const std::size_t n = batch.samples.rows();
  if (sample_shape.size() != 2) {
    CsvTable table{{"sample_id"}, {}};
    for (std::size_t c = 0; c < batch.samples.cols(); ++c)
      table.header.push_back(c == 0 ? "x" : c == 1 ? "y"
                                                   : "x" + std::to_string(c));
    table.header.push_back("y_n");
    table.header.push_back("seed");
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (double v : batch.samples.row(i)) row.push_back(FormatDouble(v));
      row.push_back(std::to_string(batch.labels[i]));
      row.push_back(std::to_string(batch.chain_seeds[i]));
      table.rows.push_back(std::move(row));
    }
    WriteCsvTable(path, table);
    return;
  }
  std::filesystem::create_directories(path);
  CsvTable manifest{{"sample_id", "y_n", "seed"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Tensor img(sample_shape);
    auto src = batch.samples.row(i);
    std::copy(src.begin(), src.end(), img.data().begin());
    WritePgm(path / SampleFileName(i), img);
    manifest.rows.push_back({std::to_string(i),
                             std::to_string(batch.labels[i]),
                             std::to_string(batch.chain_seeds[i])});
  }
  WriteCsvTable(path / "manifest.csv", manifest);
  // PGM quantizes; downstream stages read the exact values from here.
  WriteMatrixCsv(path / "samples_raw.csv", batch.samples);
  WriteMatrixCsv(path / "shape.csv",
                 Tensor::Vector({static_cast<double>(sample_shape[0]),
                                 static_cast<double>(sample_shape[1])}));
}

SampleBatch LoadSamples(const std::filesystem::path& path,
                        std::vector<std::size_t>* sample_shape) {
  SampleBatch batch;
  if (std::filesystem::is_directory(path)) {
    const auto manifest_path = path / "manifest.csv";
    const CsvTable manifest = ReadCsvTable(manifest_path, true);
    batch.samples = ReadMatrixCsv(path / "samples_raw.csv");
    if (manifest.rows.size() != batch.samples.rows())
      throw FormatError(manifest_path.string() +
                        ": row count does not match samples_raw.csv");
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      const auto& r = manifest.rows[i];
      const std::string where =
          manifest_path.string() + ":" + std::to_string(i + 2);
      if (r.size() != 3) throw FormatError(where + ": expected 3 columns");
      batch.labels.push_back(ParseBinary(r[1], where));
      batch.chain_seeds.push_back(ParseU64(r[2], where));
    }
    if (sample_shape) {
      const Tensor shape = ReadMatrixCsv(path / "shape.csv");
      *sample_shape = {static_cast<std::size_t>(shape[0]),
                       static_cast<std::size_t>(shape[1])};
    }
    return batch;
  }
  const CsvTable table = ReadCsvTable(path, true);
  if (table.rows.empty()) throw FormatError(path.string() + ": no samples");
  if (table.header.size() < 4 || table.header.front() != "sample_id")
    throw FormatError(path.string() + ":1: unexpected header");
  const std::size_t d = table.header.size() - 3;
  std::vector<double> data;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::string where = path.string() + ":" + std::to_string(i + 2);
    if (r.size() != d + 3) throw FormatError(where + ": wrong column count");
    for (std::size_t c = 0; c < d; ++c)
      data.push_back(ParseDouble(r[1 + c], where));
    batch.labels.push_back(ParseBinary(r[d + 1], where));
    batch.chain_seeds.push_back(ParseU64(r[d + 2], where));
  }
  batch.samples = Tensor({table.rows.size(), d}, std::move(data));
  if (sample_shape) *sample_shape = {d};
  return batch;
}

}  // namespace pacdiff
