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

#include "pacdiff/privacy_metrics.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pacdiff/csv_io.h"
#include "pacdiff/kernels.h"
#include "pacdiff/linalg.h"

namespace pacdiff {
namespace {

kernels::MatrixView View(const Tensor& t) {
  return {t.data().data(), t.rows(), t.cols()};
}

std::string AuditName(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%06zu.pgm", prefix, i);
  return buf;
}

}  // namespace

PrivacyReport PrivacyScore(const Tensor& generated, const Tensor& ground_truth,
                           const FeatureMap& embed,
                           const LabelPredictor& classify,
                           std::string embedder_id,
                           std::string classifier_id) {
  if (generated.empty() || ground_truth.empty() || generated.rows() == 0 ||
      ground_truth.rows() == 0)
    throw std::invalid_argument("privacy_score: empty sample set");
  const Tensor gen_features = embed(generated);
  const Tensor gt_features = embed(ground_truth);
  if (gen_features.cols() != gt_features.cols())
    throw std::invalid_argument("privacy_score: feature dimension mismatch");
  const std::vector<std::size_t> nearest =
      kernels::NearestIndices(View(gen_features), View(gt_features));
  const std::vector<int> gen_labels = classify(generated);
  const std::vector<int> gt_labels = classify(ground_truth);

  PrivacyReport report;
  report.n = generated.rows();
  report.embedder_id = std::move(embedder_id);
  report.classifier_id = std::move(classifier_id);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < report.n; ++i) {
    const std::size_t j = nearest[i];
    double acc = 0.0;
    for (std::size_t c = 0; c < gen_features.cols(); ++c) {
      const double diff = gen_features.at(i, c) - gt_features.at(j, c);
      acc += diff * diff;
    }
    AuditRecord rec{i, j, std::sqrt(acc), gen_labels[i], gt_labels[j]};
    differing += rec.differs();
    report.audits.push_back(rec);
  }
  report.score =
      static_cast<double>(differing) / static_cast<double>(report.n);
  return report;
}

FeatureMap ClassifierFeatures(const ClassifierNet& net) {
  if (net.noisy())
    throw std::invalid_argument(
        "feature map must come from a clean classifier");
  return [&net](const Tensor& x) { return Features(net, x); };
}

PrivacyReport PrivacyScore(const Tensor& generated, const Tensor& ground_truth,
                           const ClassifierNet& embedder,
                           const ClassifierNet& classifier) {
  if (classifier.noisy())
    throw std::invalid_argument(
        "privacy_score: the metric classifier must be clean");
  return PrivacyScore(
      generated, ground_truth, ClassifierFeatures(embedder),
      [&classifier](const Tensor& x) { return Predict(classifier, x); },
      "clean-classifier-penultimate(" +
          std::to_string(embedder.feature_dim()) + ")",
      "clean-classifier");
}

double FeatureFrechetDistance(const Tensor& generated, const Tensor& reference,
                              const FeatureMap& embed) {
  const Tensor gen = embed(generated);
  const Tensor ref = embed(reference);
  if (gen.cols() != ref.cols())
    throw std::invalid_argument("ffd: feature dimension mismatch");
  const std::size_t need = gen.cols() + 1;
  if (gen.rows() < need || ref.rows() < need)
    throw std::invalid_argument(
        "ffd: each set needs at least " + std::to_string(need) +
        " samples (got " + std::to_string(gen.rows()) + " and " +
        std::to_string(ref.rows()) + ")");
  const linalg::Moments a = linalg::EmpiricalMoments(gen);
  const linalg::Moments b = linalg::EmpiricalMoments(ref);
  return linalg::FrechetDistance(a.mean, a.cov, b.mean, b.cov);
}

void WritePrivacyReport(const std::filesystem::path& path,
                        const PrivacyReport& report) {
  CsvTable table{{"gen_id", "nn_id", "l2", "label_gen", "label_nn", "differs"},
                 {}};
  for (const auto& a : report.audits)
    table.rows.push_back({std::to_string(a.gen_id), std::to_string(a.nn_id),
                          FormatDouble(a.l2), std::to_string(a.label_gen),
                          std::to_string(a.label_nn),
                          a.differs() ? "1" : "0"});
  WriteCsvTable(path, table);
}

void WriteMetricSummary(const std::filesystem::path& path,
                        const PrivacyReport& report,
                        std::optional<double> ffd) {
  CsvTable table{{"score", "n", "ffd", "embedder", "classifier"}, {}};
  table.rows.push_back({FormatDouble(report.score), std::to_string(report.n),
                        ffd ? FormatDouble(*ffd) : "nan", report.embedder_id,
                        report.classifier_id});
  WriteCsvTable(path, table);
}

void WriteAuditImages(const std::filesystem::path& dir,
                      const PrivacyReport& report, const Tensor& generated,
                      const Tensor& ground_truth,
                      const std::vector<std::size_t>& sample_shape,
                      std::size_t limit) {
  if (sample_shape.size() != 2) return;
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < report.audits.size() && i < limit; ++i) {
    const auto& a = report.audits[i];
    Tensor gen(sample_shape);
    Tensor nn(sample_shape);
    auto g = generated.row(a.gen_id);
    auto t = ground_truth.row(a.nn_id);
    std::copy(g.begin(), g.end(), gen.data().begin());
    std::copy(t.begin(), t.end(), nn.data().begin());
    WritePgm(dir / AuditName("gen", a.gen_id), gen);
    WritePgm(dir / AuditName("nn", a.gen_id), nn);
  }
}

}  // namespace pacdiff
