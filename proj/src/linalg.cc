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

#include "pacdiff/linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pacdiff::linalg {
namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr double kClampRelative = 1e-12;
constexpr double kNegativeRejectRelative = 1e-6;
constexpr int kMaxSweeps = 100;

void RequireSquare(const Tensor& m, const char* op) {
  if (m.rank() != 2 || m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(op) +
                                ": expected a square matrix, got " +
                                m.ShapeString());
  }
}

double OffDiagonalNorm(const Tensor& a) {
  const std::size_t n = a.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) acc += a.at(i, j) * a.at(i, j);
  return std::sqrt(acc);
}

// Eigenvalues clamped to [0, inf) per the PSD contract of SqrtPsd.
std::vector<double> ClampedValues(const EigenSystem& eig, const char* op) {
  const double lmax = eig.values.empty() ? 0.0 : std::max(0.0, eig.values[0]);
  std::vector<double> out = eig.values;
  for (double& v : out) {
    if (v < -kNegativeRejectRelative * lmax ||
        (lmax == 0.0 && v < -kNegativeRejectRelative)) {
      throw std::invalid_argument(std::string(op) +
                                  ": matrix is not positive semidefinite "
                                  "(eigenvalue " +
                                  std::to_string(v) + ")");
    }
    if (v < kClampRelative * lmax || v < 0.0) v = 0.0;
  }
  return out;
}

}  // namespace

double Trace(const Tensor& m) {
  RequireSquare(m, "trace");
  double t = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) t += m.at(i, i);
  return t;
}

Tensor Symmetrized(const Tensor& m) {
  RequireSquare(m, "symmetrize");
  Tensor s(m.shape());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      s.at(i, j) = 0.5 * (m.at(i, j) + m.at(j, i));
  return s;
}

Moments EmpiricalMoments(const Tensor& samples) {
  if (samples.rank() != 2) {
    throw std::invalid_argument("empirical_moments: expected [m, d], got " +
                                samples.ShapeString());
  }
  const std::size_t m = samples.rows();
  const std::size_t d = samples.cols();
  if (m < 2) {
    throw std::invalid_argument("empirical_moments: need at least 2 samples, "
                                "got " + std::to_string(m));
  }
  Moments out{std::vector<double>(d, 0.0), Tensor({d, d})};
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += samples.at(k, j);
  for (double& v : out.mean) v /= static_cast<double>(m);

  std::vector<double> centered(d);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < d; ++j)
      centered[j] = samples.at(k, j) - out.mean[j];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j)
        out.cov.at(i, j) += centered[i] * centered[j];
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      out.cov.at(i, j) /= static_cast<double>(m);
      out.cov.at(j, i) = out.cov.at(i, j);
    }
  }
  return out;
}

Moments EmpiricalMoments(std::span<const std::vector<double>> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("empirical_moments: need at least 2 samples, "
                                "got " + std::to_string(samples.size()));
  }
  return EmpiricalMoments(StackRows(samples));
}

EigenSystem Eigh(const Tensor& sym) {
  RequireSquare(sym, "eigh");
  const std::size_t n = sym.rows();
  const double norm = FrobeniusNorm(sym);
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = sym.at(i, j) - sym.at(j, i);
      asym += diff * diff;
    }
  if (std::sqrt(asym) > kSymmetryTolerance * norm) {
    throw std::invalid_argument("eigh: matrix is not symmetric");
  }
  if (!sym.AllFinite()) throw std::invalid_argument("eigh: non-finite entry");

  Tensor a = Symmetrized(sym);
  Tensor v = Tensor::Identity(n);
  const double target = kOffDiagonalTolerance * norm;

  for (int sweep = 0; sweep < kMaxSweeps && OffDiagonalNorm(a) > target;
       ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        // Rotation angle that annihilates a(p,q); the smaller root of
        // t^2 + 2 theta t - 1 = 0 keeps the rotation stable.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k);
          const double aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v.at(k, p);
          const double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x,
                                                   std::size_t y) {
    return a.at(x, x) > a.at(y, y);
  });
  EigenSystem eig{Tensor({n, n}), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    eig.values[j] = a.at(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k)
      eig.vectors.at(k, j) = v.at(k, order[j]);
  }
  return eig;
}

Tensor Reconstruct(const EigenSystem& eig) {
  const std::size_t n = eig.values.size();
  Tensor out({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += eig.vectors.at(i, k) * eig.values[k] * eig.vectors.at(j, k);
      out.at(i, j) = acc;
    }
  return out;
}

Tensor SqrtPsd(const Tensor& sym) {
  EigenSystem eig = Eigh(sym);
  eig.values = ClampedValues(eig, "sqrt_psd");
  for (double& v : eig.values) v = std::sqrt(v);
  return Symmetrized(Reconstruct(eig));
}

double FrechetDistance(std::span<const double> mu1, const Tensor& sigma1,
                       std::span<const double> mu2, const Tensor& sigma2) {
  const std::size_t d = mu1.size();
  if (mu2.size() != d || sigma1.rank() != 2 || sigma2.rank() != 2 ||
      sigma1.rows() != d || sigma1.cols() != d || sigma2.rows() != d ||
      sigma2.cols() != d) {
    throw std::invalid_argument(
        "frechet_distance: dimension mismatch (mu " + std::to_string(d) +
        " / " + std::to_string(mu2.size()) + ", sigma " +
        sigma1.ShapeString() + " / " + sigma2.ShapeString() + ")");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = mu1[i] - mu2[i];
    mean_term += diff * diff;
  }
  const Tensor root1 = SqrtPsd(sigma1);
  const Tensor inner =
      Symmetrized(ops::Matmul(ops::Matmul(root1, sigma2), root1));
  EigenSystem eig = Eigh(inner);
  const std::vector<double> lambda = ClampedValues(eig, "frechet_distance");
  double cross = 0.0;
  for (double v : lambda) cross += std::sqrt(v);
  const double value =
      mean_term + Trace(sigma1) + Trace(sigma2) - 2.0 * cross;
  // Rounding can leave a tiny negative residue for equal arguments.
  return std::max(0.0, value);
}

}  // namespace pacdiff::linalg
