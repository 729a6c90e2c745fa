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

#ifndef PACDIFF_PRIVACY_METRICS_H_
#define PACDIFF_PRIVACY_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pacdiff/classifier.h"
#include "pacdiff/tensor.h"

namespace pacdiff {

// Maps a batch of samples [n, D] to features [n, F].
using FeatureMap = std::function<Tensor(const Tensor&)>;
// Maps a batch of samples [n, D] to predicted labels.
using LabelPredictor = std::function<std::vector<int>(const Tensor&)>;

struct AuditRecord {
  std::size_t gen_id;
  std::size_t nn_id;
  double l2;  // feature-space distance to the nearest ground-truth item
  int label_gen;
  int label_nn;
  bool differs() const { return label_gen != label_nn; }
};

struct PrivacyReport {
  double score = 0.0;
  std::size_t n = 0;
  std::vector<AuditRecord> audits;
  std::string embedder_id;
  std::string classifier_id;
};

// For every generated sample, finds the ground-truth sample nearest in
// feature space (exact search, lowest index wins ties) and counts how often
// the classifier labels the two differently. score = count / n.
PrivacyReport PrivacyScore(const Tensor& generated, const Tensor& ground_truth,
                           const FeatureMap& embed,
                           const LabelPredictor& classify,
                           std::string embedder_id = "custom",
                           std::string classifier_id = "custom");

// Embeds with Features(embedder) and labels with Predict(classifier); both
// must be clean classifiers.
PrivacyReport PrivacyScore(const Tensor& generated, const Tensor& ground_truth,
                           const ClassifierNet& embedder,
                           const ClassifierNet& classifier);

// Frechet distance between Gaussians fitted to the embedded sets. Each set
// needs at least feature_dim + 1 samples.
double FeatureFrechetDistance(const Tensor& generated, const Tensor& reference,
                              const FeatureMap& embed);

FeatureMap ClassifierFeatures(const ClassifierNet& net);

// "gen_id,nn_id,l2,label_gen,label_nn,differs" rows.
void WritePrivacyReport(const std::filesystem::path& path,
                        const PrivacyReport& report);
// One-row summary: "score,n,ffd,embedder,classifier".
void WriteMetricSummary(const std::filesystem::path& path,
                        const PrivacyReport& report,
                        std::optional<double> ffd);
// Writes gen_<id>.pgm / nn_<id>.pgm pairs for the first `limit` audits.
void WriteAuditImages(const std::filesystem::path& dir,
                      const PrivacyReport& report, const Tensor& generated,
                      const Tensor& ground_truth,
                      const std::vector<std::size_t>& sample_shape,
                      std::size_t limit);

}  // namespace pacdiff

#endif  // PACDIFF_PRIVACY_METRICS_H_
