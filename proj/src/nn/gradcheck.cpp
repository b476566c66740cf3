// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "taonet/error.hpp"
#include "taonet/rng.hpp"

namespace taonet::nn {

GradCheckResult gradient_check(const DifferentiableUnit& unit, const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0) || options.epsilon > 1e-2) {
    throw Error(ErrorCode::kInvalidConfig, "gradient check epsilon must lie in (0, 1e-2]");
  }
  const std::size_t n = unit.params.size();
  std::vector<double> analytic(n, 0.0);
  unit.loss_and_grad(analytic);

  std::vector<std::size_t> coords(n);
  std::iota(coords.begin(), coords.end(), 0);
  if (options.samples != 0 && options.samples < n) {
    Rng rng(options.seed);
    rng.shuffle(coords);
    coords.resize(options.samples);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult result;
  const std::span<double> none;
  for (std::size_t i : coords) {
    const double saved = unit.params[i];
    unit.params[i] = saved + options.epsilon;
    const double plus = unit.loss_and_grad(none);
    unit.params[i] = saved - options.epsilon;
    const double minus = unit.loss_and_grad(none);
    unit.params[i] = saved;
    const double numeric = (plus - minus) / (2.0 * options.epsilon);
    const double a = analytic[i];
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    if (result.checked == 0 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = i;
      result.analytic = a;
      result.numeric = numeric;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace taonet::nn
