// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace taonet::ood {

/// Maps a raw score to clamp((x - low) / (high - low), 0, 1).
struct NormalizationBounds {
  double low = 0.0;
  double high = 1.0;

  double normalize(double raw) const;
  friend bool operator==(const NormalizationBounds&, const NormalizationBounds&) = default;
};

struct HybridScoreConfig {
  double alpha = 0.6;
  double delta = 0.75;
  NormalizationBounds residual;
  NormalizationBounds smoothness;

  friend bool operator==(const HybridScoreConfig&, const HybridScoreConfig&) = default;
};

struct ScoreBreakdown {
  double residual_raw = 0.0;
  double smoothness_raw = 0.0;
  double residual_norm = 0.0;
  double smoothness_norm = 0.0;
  double hybrid = 0.0;
  bool is_ood = false;
};

/// S = alpha * s1 + (1 - alpha) * s2; OOD iff S > delta. The raw fields of
/// the result are left at zero.
ScoreBreakdown hybrid_score(const HybridScoreConfig& config, double residual_norm,
                            double smoothness_norm);

/// Linear-interpolation percentile (q in [0, 100]) of a non-empty sample.
double percentile(std::vector<double> values, double q);

/// Bounds from the given percentiles; if high <= low, high becomes low + 1.
NormalizationBounds fit_bounds(std::span<const double> raw, double low_percentile = 1.0,
                               double high_percentile = 99.0);

}  // namespace taonet::ood
