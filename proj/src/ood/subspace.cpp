// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ood/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "taonet/error.hpp"

namespace taonet::ood {
namespace {

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

// Projector onto the span of eigenvector columns [first, last).
Matrix column_projector(const Matrix& v, std::size_t first, std::size_t last) {
  const std::size_t m = v.rows();
  Matrix p(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t c = first; c < last; ++c) acc += v(i, c) * v(j, c);
      p(i, j) = acc;
      p(j, i) = acc;
    }
  }
  return p;
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance, std::size_t max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "eigendecomposition needs a square matrix");
  }
  for (double v : symmetric.flat()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kDecompositionFailure, "matrix has non-finite entries");
    }
  }
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  std::size_t sweep = 0;
  while (off_diagonal_norm(a) >= tolerance) {
    if (sweep++ == max_sweeps) {
      throw Error(ErrorCode::kDecompositionFailure,
                  "Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that zeroes a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymmetricEigen out;
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values.push_back(a(order[c], order[c]));
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

FeatureStats fit_statistics(const std::vector<std::vector<double>>& features) {
  if (features.size() < 2) {
    throw Error(ErrorCode::kTooFewSamples, "need at least 2 feature vectors, got " +
                                               std::to_string(features.size()));
  }
  const std::size_t d = features.front().size();
  FeatureStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& f : features) {
    if (f.size() != d) throw Error(ErrorCode::kDimensionMismatch, "feature vectors differ in length");
    for (std::size_t i = 0; i < d; ++i) s.mu[i] += f[i];
  }
  const double n = static_cast<double>(features.size());
  for (double& m : s.mu) m /= n;
  for (const auto& f : features) {
    for (std::size_t i = 0; i < d; ++i) s.sigma[i] += (f[i] - s.mu[i]) * (f[i] - s.mu[i]);
  }
  for (double& v : s.sigma) {
    v = std::sqrt(v / n);
    if (v < 1e-12) v = 1.0;
  }
  return s;
}

std::size_t select_components(std::span<const double> eigenvalues, double gamma) {
  const double total = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  if (!(total > 0.0)) return eigenvalues.size();
  double prefix = 0.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    prefix += eigenvalues[k];
    if (prefix / total >= gamma) return k + 1;
  }
  return eigenvalues.size();
}

std::vector<double> SubspaceModel::standardize(std::span<const double> phi) const {
  if (phi.size() != mu.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature has length " + std::to_string(phi.size()) +
                                                   ", model expects " + std::to_string(mu.size()));
  }
  std::vector<double> z(phi.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (phi[i] - mu[i]) / sigma[i];
  return z;
}

Matrix SubspaceModel::principal_projector() const {
  return column_projector(eigenvectors, 0, k);
}

SubspaceModel make_subspace(FeatureStats stats, SymmetricEigen eigen, std::size_t k, double gamma) {
  const std::size_t m = stats.mu.size();
  if (stats.sigma.size() != m || eigen.values.size() != m || eigen.vectors.rows() != m ||
      eigen.vectors.cols() != m || k > m) {
    throw Error(ErrorCode::kDimensionMismatch, "inconsistent subspace model parts");
  }
  SubspaceModel model;
  model.mu = std::move(stats.mu);
  model.sigma = std::move(stats.sigma);
  model.eigenvalues = std::move(eigen.values);
  model.eigenvectors = std::move(eigen.vectors);
  model.k = k;
  model.gamma = gamma;
  model.residual_projector = column_projector(model.eigenvectors, k, m);
  return model;
}

SubspaceModel fit_subspace(const std::vector<std::vector<double>>& features,
                           const FeatureStats& stats, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "gamma must lie in (0, 1]");
  }
  if (features.size() < 2) throw Error(ErrorCode::kTooFewSamples, "need at least 2 feature vectors");
  const std::size_t m = stats.mu.size();
  SubspaceModel probe;
  probe.mu = stats.mu;
  probe.sigma = stats.sigma;

  Matrix z(features.size(), m);
  for (std::size_t r = 0; r < features.size(); ++r) {
    const auto zr = probe.standardize(features[r]);
    std::copy(zr.begin(), zr.end(), z.row(r).begin());
  }
  Matrix cov(m, m);
  nn::gemm_tn(z.data(), z.data(), cov.data(), m, features.size(), m, false);
  const double inv_n = 1.0 / static_cast<double>(features.size());
  for (double& v : cov.flat()) v *= inv_n;
  // Symmetrize away rounding so Jacobi sees an exactly symmetric input.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double s = 0.5 * (cov(i, j) + cov(j, i));
      cov(i, j) = s;
      cov(j, i) = s;
    }
  }
  auto eigen = jacobi_eigen(cov);
  const std::size_t k = select_components(eigen.values, gamma);
  return make_subspace(stats, std::move(eigen), k, gamma);
}

double residual_score(const SubspaceModel& model, std::span<const double> phi) {
  const auto z = model.standardize(phi);
  std::vector<double> r(z.size());
  nn::matvec(model.residual_projector.flat(), z, {}, r);
  return nn::l2_norm(r);
}

}  // namespace taonet::ood
