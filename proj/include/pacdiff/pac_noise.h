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

// Gaussian noise calibration for a deterministic mechanism from m output
// samples y^(1..m).
//
// With (lambda_j, u_j) the eigensystem of the empirical output covariance
// (descending), and j0 the number of eigenvalues above c:
//
//   anisotropic: Sigma_B = U diag(lambda_B) U^T,
//       lambda_B,j = 2 nu / (sqrt(lambda_j + 10 c nu / beta)
//                            * sum_k sqrt(lambda_k + 10 c nu / beta))
//   isotropic:   Sigma_B = (sum_j lambda_j + d c / (2 nu)) I
//
// The anisotropic branch is taken when j0 >= 1 and every consecutive gap
// lambda_j - lambda_{j+1} (j = 1..j0, lambda_{d+1} = 0) exceeds
// r * sqrt(d / c + 2 c).

#ifndef PACDIFF_PAC_NOISE_H_
#define PACDIFF_PAC_NOISE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pacdiff/linalg.h"
#include "pacdiff/rng.h"
#include "pacdiff/tensor.h"

namespace pacdiff {

struct PacParams {
  double nu = 0.5;
  double beta = 0.5;
  double c = 0.01;
  double gamma = 0.01;  // reported only
  double r = 0.1;
};

enum class NoiseBranch { kAnisotropic, kIsotropic };
enum class BranchPolicy { kAuto, kForceAnisotropic, kForceIsotropic };

std::string BranchName(NoiseBranch b);
BranchPolicy ParseBranchPolicy(const std::string& s);

struct NormEstimate {
  double mc = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;  // sqrt(tr Sigma_B)
};

struct PacNoiseResult {
  std::vector<double> mu_hat;
  Tensor sigma_hat;
  linalg::EigenSystem eig;
  NoiseBranch branch = NoiseBranch::kIsotropic;
  Tensor sigma_b;
  std::vector<double> lambda_b;  // eigenvalues of sigma_b along eig.vectors
  std::size_t j0 = 0;
  double min_gap = 0.0;
  double threshold = 0.0;
  std::string condition;  // the branch test as evaluated
  NormEstimate e_norm;
  PacParams params;
  std::size_t m = 0;
};

// outputs: [m, d]. Throws on m < 2, non-positive nu/beta/c/r or non-finite
// eigenvalues.
PacNoiseResult DetermineNoise(const Tensor& outputs, const PacParams& params,
                              BranchPolicy policy = BranchPolicy::kAuto);

// Monte Carlo E||B||_2 for B ~ N(0, sigma_b).
NormEstimate ExpectedNorm(const Tensor& sigma_b, std::size_t n_mc, Rng& rng);

// MI between M and M + B for jointly Gaussian M ~ N(., sigma_m) and
// independent B ~ N(0, sigma_b). The two covariances must commute; a
// singular sigma_b is rejected.
double GaussianMutualInformation(const Tensor& sigma_m, const Tensor& sigma_b);

// Deterministic map from a run index to an output vector.
using Mechanism = std::function<std::vector<double>(std::uint64_t run)>;

// Evaluates runs 0..m-1 (in parallel when available) and stacks them in run
// order.
Tensor CollectOutputs(const Mechanism& mechanism, std::size_t m);

// Run k draws n points from N(mu0 * 1, sigma0^2 I) with Rng::ForStream(seed,
// k) and returns their mean.
Mechanism IdentityMeanMechanism(std::size_t d, double mu0, double sigma0,
                                std::size_t n, std::uint64_t seed);
Mechanism ConstantMechanism(std::vector<double> value);

void SavePacResult(const std::filesystem::path& dir,
                   const PacNoiseResult& result, const Tensor& outputs);

}  // namespace pacdiff

#endif  // PACDIFF_PAC_NOISE_H_
