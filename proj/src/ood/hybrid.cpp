// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ood/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "taonet/error.hpp"

namespace taonet::ood {

double NormalizationBounds::normalize(double raw) const {
  return std::clamp((raw - low) / (high - low), 0.0, 1.0);
}

ScoreBreakdown hybrid_score(const HybridScoreConfig& config, double residual_norm,
                            double smoothness_norm) {
  ScoreBreakdown b;
  b.residual_norm = residual_norm;
  b.smoothness_norm = smoothness_norm;
  b.hybrid = config.alpha * residual_norm + (1.0 - config.alpha) * smoothness_norm;
  b.is_ood = b.hybrid > config.delta;
  return b;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kTooFewSamples, "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

NormalizationBounds fit_bounds(std::span<const double> raw, double low_percentile,
                               double high_percentile) {
  const std::vector<double> v(raw.begin(), raw.end());
  NormalizationBounds b{percentile(v, low_percentile), percentile(v, high_percentile)};
  if (!(b.high > b.low)) b.high = b.low + 1.0;
  return b;
}

}  // namespace taonet::ood
