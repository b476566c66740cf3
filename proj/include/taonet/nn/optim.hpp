// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace taonet::nn {

struct AdamConfig {
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decoupled decay (AdamW). Zero gives plain Adam.
  double weight_decay = 0.0;
};

/// Adam / AdamW over one flat parameter buffer:
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2
///   theta -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
/// Parameters are rounded to float32 after every step.
class Adam {
 public:
  Adam(std::size_t size, const AdamConfig& config);

  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace taonet::nn
