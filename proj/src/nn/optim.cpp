// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/optim.hpp"

#include <cmath>

#include "taonet/error.hpp"

namespace taonet::nn {

Adam::Adam(std::size_t size, const AdamConfig& config)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "optimizer state size mismatch");
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double wd = config_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    double p = params[i];
    if (wd != 0.0) p -= lr * wd * p;
    p -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    params[i] = static_cast<double>(static_cast<float>(p));
  }
}

}  // namespace taonet::nn
