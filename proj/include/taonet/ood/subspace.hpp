// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "taonet/nn/tensor.hpp"

namespace taonet::ood {

using nn::Matrix;

/// Eigenpairs of a symmetric matrix, eigenvalues non-increasing and the
/// matching eigenvectors stored as columns.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops
/// below `tolerance`. Throws Error{kDimensionMismatch} for a non-square
/// input and Error{kDecompositionFailure} on non-finite entries or when
/// `max_sweeps` sweeps do not converge.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-10,
                            std::size_t max_sweeps = 100);

struct FeatureStats {
  std::vector<double> mu;
  std::vector<double> sigma;
};

/// Per-dimension mean and population standard deviation. Dimensions with
/// sigma < 1e-12 get sigma = 1. Throws Error{kTooFewSamples} below two
/// vectors and Error{kDimensionMismatch} on ragged input.
FeatureStats fit_statistics(const std::vector<std::vector<double>>& features);

/// Smallest k whose leading eigenvalues carry at least `gamma` of the total.
/// A non-positive total selects every component.
std::size_t select_components(std::span<const double> eigenvalues, double gamma);

struct SubspaceModel {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<double> eigenvalues;
  Matrix eigenvectors;  // columns v_1 .. v_m
  std::size_t k = 0;
  double gamma = 0.95;
  Matrix residual_projector;  // V_R V_R^T over v_{k+1} .. v_m

  std::size_t dim() const { return mu.size(); }
  std::vector<double> standardize(std::span<const double> phi) const;
  /// V_P V_P^T over v_1 .. v_k.
  Matrix principal_projector() const;
};

/// Assembles a model from its stored parts and rebuilds P_R.
SubspaceModel make_subspace(FeatureStats stats, SymmetricEigen eigen, std::size_t k, double gamma);

/// Covariance of the standardized features, eigendecomposition and the
/// residual projector. Throws Error{kInvalidConfig} unless 0 < gamma <= 1.
SubspaceModel fit_subspace(const std::vector<std::vector<double>>& features,
                           const FeatureStats& stats, double gamma = 0.95);

/// || P_R (phi - mu) / sigma ||. Throws Error{kDimensionMismatch}.
double residual_score(const SubspaceModel& model, std::span<const double> phi);

}  // namespace taonet::ood
