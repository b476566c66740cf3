// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace taonet::nn {

/// A scalar loss over a flat parameter buffer. `loss_and_grad` evaluates
/// the loss at the current contents of `params`; when handed a non-empty
/// span it also writes the analytic gradient there (overwriting).
struct DifferentiableUnit {
  std::span<double> params;
  std::function<double(std::span<double> grad)> loss_and_grad;
};

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t samples = 64;  // coordinates probed; 0 probes all
  std::uint64_t seed = 42;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Central-difference check. The relative error of a coordinate is
/// |a - n| / max(|a|, |n|, 1e-6); the floor keeps coordinates with a
/// near-zero gradient from dominating. Parameters are restored afterwards.
/// Throws Error{kInvalidConfig} unless 0 < epsilon <= 1e-2.
GradCheckResult gradient_check(const DifferentiableUnit& unit, const GradCheckOptions& options = {});

}  // namespace taonet::nn
