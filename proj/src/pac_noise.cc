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

#include "pacdiff/pac_noise.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>

#include "pacdiff/csv_io.h"
#include "pacdiff/kernels.h"

namespace pacdiff {
namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Tensor ConjugateDiagonal(const Tensor& u, std::span<const double> diag) {
  const std::size_t d = diag.size();
  Tensor out({d, d});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        acc += u.at(i, k) * diag[k] * u.at(j, k);
      out.at(i, j) = acc;
    }
  return out;
}

}  // namespace

std::string BranchName(NoiseBranch b) {
  return b == NoiseBranch::kAnisotropic ? "anisotropic" : "isotropic";
}

BranchPolicy ParseBranchPolicy(const std::string& s) {
  if (s == "auto") return BranchPolicy::kAuto;
  if (s == "anisotropic") return BranchPolicy::kForceAnisotropic;
  if (s == "isotropic") return BranchPolicy::kForceIsotropic;
  throw std::invalid_argument("unknown branch policy '" + s +
                              "' (auto|anisotropic|isotropic)");
}

PacNoiseResult DetermineNoise(const Tensor& outputs, const PacParams& params,
                              BranchPolicy policy) {
  if (outputs.rank() != 2 || outputs.rows() < 2)
    throw std::invalid_argument("determine_noise: need at least 2 outputs");
  if (!(params.nu > 0) || !(params.beta > 0) || !(params.c > 0) ||
      !(params.r > 0))
    throw std::invalid_argument(
        "determine_noise: nu, beta, c and r must be positive");
  if (!outputs.AllFinite())
    throw std::invalid_argument("determine_noise: non-finite output vector");

  PacNoiseResult res;
  res.params = params;
  res.m = outputs.rows();
  const std::size_t d = outputs.cols();
  linalg::Moments mom = linalg::EmpiricalMoments(outputs);
  res.mu_hat = std::move(mom.mean);
  res.sigma_hat = std::move(mom.cov);
  res.eig = linalg::Eigh(res.sigma_hat);
  const std::vector<double>& lambda = res.eig.values;
  for (double l : lambda)
    if (!std::isfinite(l))
      throw std::runtime_error("determine_noise: non-finite eigenvalue");

  res.j0 = static_cast<std::size_t>(
      std::count_if(lambda.begin(), lambda.end(),
                    [&](double l) { return l > params.c; }));
  res.threshold = params.r * std::sqrt(static_cast<double>(d) / params.c +
                                       2.0 * params.c);
  res.min_gap = HUGE_VAL;
  for (std::size_t j = 0; j < res.j0; ++j) {
    const double next = j + 1 < d ? lambda[j + 1] : 0.0;
    res.min_gap = std::min(res.min_gap, lambda[j] - next);
  }
  const bool gap_ok = res.j0 > 0 && res.min_gap > res.threshold;
  res.condition = "j0=" + std::to_string(res.j0) +
                  "; min_{1<=j<=j0}(lambda_j - lambda_{j+1}) = " +
                  (res.j0 > 0 ? Num(res.min_gap) : std::string("n/a")) +
                  " > r*sqrt(d/c + 2c) = " + Num(res.threshold) + " -> " +
                  (gap_ok ? "true" : "false");
  switch (policy) {
    case BranchPolicy::kAuto:
      res.branch = gap_ok ? NoiseBranch::kAnisotropic : NoiseBranch::kIsotropic;
      break;
    case BranchPolicy::kForceAnisotropic:
      res.branch = NoiseBranch::kAnisotropic;
      res.condition += " (overridden: anisotropic)";
      break;
    case BranchPolicy::kForceIsotropic:
      res.branch = NoiseBranch::kIsotropic;
      res.condition += " (overridden: isotropic)";
      break;
  }

  if (res.branch == NoiseBranch::kAnisotropic) {
    const double shift = 10.0 * params.c * params.nu / params.beta;
    std::vector<double> roots(d);
    double root_sum = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      roots[j] = std::sqrt(std::max(0.0, lambda[j]) + shift);
      root_sum += roots[j];
    }
    res.lambda_b.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      res.lambda_b[j] = 2.0 * params.nu / (roots[j] * root_sum);
    res.sigma_b = linalg::Symmetrized(
        ConjugateDiagonal(res.eig.vectors, res.lambda_b));
  } else {
    double total = 0.0;
    for (double l : lambda) total += l;
    const double scale =
        total + static_cast<double>(d) * params.c / (2.0 * params.nu);
    res.lambda_b.assign(d, scale);
    res.sigma_b = Tensor::Identity(d);
    for (double& v : res.sigma_b.values()) v *= scale;
  }
  return res;
}

NormEstimate ExpectedNorm(const Tensor& sigma_b, std::size_t n_mc, Rng& rng) {
  if (n_mc < 2) throw std::invalid_argument("expected_norm: n_mc must be >= 2");
  const std::size_t d = sigma_b.rows();
  const linalg::EigenSystem eig = linalg::Eigh(sigma_b);
  const double lmax = std::max(0.0, eig.values.front());
  std::vector<double> roots(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (eig.values[j] < -1e-9 * std::max(1.0, lmax))
      throw std::invalid_argument("expected_norm: covariance is not PSD");
    roots[j] = std::sqrt(std::max(0.0, eig.values[j]));
  }
  std::vector<double> z(d);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < n_mc; ++s) {
    rng.FillGaussian(z);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double b = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        b += eig.vectors.at(i, k) * roots[k] * z[k];
      norm_sq += b * b;
    }
    const double norm = std::sqrt(norm_sq);
    sum += norm;
    sum_sq += norm * norm;
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n),
          std::sqrt(std::max(0.0, linalg::Trace(sigma_b)))};
}

double GaussianMutualInformation(const Tensor& sigma_m, const Tensor& sigma_b) {
  if (sigma_m.shape() != sigma_b.shape() || sigma_m.rank() != 2 ||
      sigma_m.rows() != sigma_m.cols())
    throw std::invalid_argument("gaussian_mi: covariances must be square and "
                                "of equal size");
  const Tensor ab = ops::Matmul(sigma_m, sigma_b);
  const Tensor ba = ops::Matmul(sigma_b, sigma_m);
  const double scale =
      std::max(1.0, FrobeniusNorm(sigma_m) * FrobeniusNorm(sigma_b));
  if (MaxAbsDiff(ab, ba) > 1e-9 * scale)
    throw std::invalid_argument(
        "gaussian_mi: covariances do not commute; no closed form");
  const linalg::EigenSystem eb = linalg::Eigh(sigma_b);
  if (!(eb.values.back() > 0.0))
    throw std::invalid_argument(
        "gaussian_mi: noise covariance is singular (infinite information)");
  const linalg::EigenSystem es = linalg::Eigh(ops::Add(sigma_m, sigma_b));
  double mi = 0.0;
  for (std::size_t j = 0; j < es.values.size(); ++j)
    mi += 0.5 * (std::log(es.values[j]) - std::log(eb.values[j]));
  return std::max(0.0, mi);
}

Tensor CollectOutputs(const Mechanism& mechanism, std::size_t m) {
  if (m == 0) throw std::invalid_argument("collect_outputs: m must be >= 1");
  std::vector<std::vector<double>> results(m);
  std::vector<std::exception_ptr> errors(m);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < m; ++k) {
    try {
      results[k] = mechanism(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const std::exception& e) {
      throw std::runtime_error("mechanism run " + std::to_string(k) +
                               " failed: " + e.what());
    }
  }
  const std::size_t d = results[0].size();
  Tensor out({m, d});
  for (std::size_t k = 0; k < m; ++k) {
    if (results[k].size() != d)
      throw std::runtime_error("mechanism run " + std::to_string(k) +
                               " returned a vector of different length");
    std::copy(results[k].begin(), results[k].end(), out.row(k).begin());
  }
  return out;
}

Mechanism IdentityMeanMechanism(std::size_t d, double mu0, double sigma0,
                                std::size_t n, std::uint64_t seed) {
  if (d == 0 || n == 0)
    throw std::invalid_argument("identity mechanism: d and n must be >= 1");
  return [=](std::uint64_t run) {
    Rng rng = Rng::ForStream(seed, run);
    std::vector<double> mean(d, 0.0);
    std::vector<double> z(d);
    for (std::size_t i = 0; i < n; ++i) {
      rng.FillGaussian(z);
      for (std::size_t j = 0; j < d; ++j) mean[j] += mu0 + sigma0 * z[j];
    }
    for (double& v : mean) v /= static_cast<double>(n);
    return mean;
  };
}

Mechanism ConstantMechanism(std::vector<double> value) {
  return [value = std::move(value)](std::uint64_t) { return value; };
}

void SavePacResult(const std::filesystem::path& dir,
                   const PacNoiseResult& result, const Tensor& outputs) {
  std::filesystem::create_directories(dir);
  CsvTable t{{"key", "value"}, {}};
  auto add = [&](const std::string& k, const std::string& v) {
    t.rows.push_back({k, v});
  };
  add("m", std::to_string(result.m));
  add("d", std::to_string(result.sigma_b.rows()));
  add("nu", FormatDouble(result.params.nu));
  add("beta", FormatDouble(result.params.beta));
  add("c", FormatDouble(result.params.c));
  add("gamma", FormatDouble(result.params.gamma));
  add("r", FormatDouble(result.params.r));
  add("branch", BranchName(result.branch));
  add("condition", result.condition);
  add("trace_sigma_hat", FormatDouble(linalg::Trace(result.sigma_hat)));
  add("trace_sigma_b", FormatDouble(linalg::Trace(result.sigma_b)));
  add("e_norm_mc", FormatDouble(result.e_norm.mc));
  add("e_norm_se", FormatDouble(result.e_norm.standard_error));
  add("e_norm_bound", FormatDouble(result.e_norm.bound));
  for (std::size_t j = 0; j < result.eig.values.size(); ++j)
    add("lambda_" + std::to_string(j + 1), FormatDouble(result.eig.values[j]));
  WriteCsvTable(dir / "pac_result.csv", t);
  WriteMatrixCsv(dir / "sigma_b.csv", result.sigma_b);
  WriteMatrixCsv(dir / "outputs.csv", outputs);
}

}  // namespace pacdiff
