// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/head.hpp"

#include <algorithm>
#include <cmath>

#include "taonet/error.hpp"

namespace taonet::nn {

LinearHead::LinearHead(std::size_t outputs, std::size_t inputs)
    : outputs_(outputs), inputs_(inputs) {
  params_.add("head.W", {outputs, inputs});
  params_.add("head.b", {outputs});
}

LinearHead::LinearHead(std::size_t outputs, std::size_t inputs, Rng& rng)
    : LinearHead(outputs, inputs) {
  params_.init_uniform(0, inputs, rng);
  params_.init_uniform(1, inputs, rng);
}

std::vector<double> LinearHead::forward(std::span<const double> x) const {
  if (x.size() != inputs_) {
    throw Error(ErrorCode::kDimensionMismatch, "head expects " + std::to_string(inputs_) +
                                                   " inputs, got " + std::to_string(x.size()));
  }
  std::vector<double> y(outputs_);
  matvec(weights(), x, bias(), y);
  return y;
}

std::vector<double> LinearHead::backward(std::span<const double> x,
                                         std::span<const double> d_logits,
                                         std::span<double> grad) const {
  double* dw = grad.data() + params_.spec(0).offset;
  double* db = grad.data() + params_.spec(1).offset;
  const auto w = weights();
  std::vector<double> dx(inputs_, 0.0);
  for (std::size_t o = 0; o < outputs_; ++o) {
    const double g = d_logits[o];
    db[o] += g;
    for (std::size_t i = 0; i < inputs_; ++i) {
      dw[o * inputs_ + i] += g * x[i];
      dx[i] += g * w[o * inputs_ + i];
    }
  }
  return dx;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

double bce_with_logits(std::span<const double> logits, std::span<const double> targets,
                       std::span<double> d_logits) {
  const double n = static_cast<double>(logits.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double y = targets[i];
    // max(z, 0) - z*y + log(1 + exp(-|z|))
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    if (!d_logits.empty()) d_logits[i] = (sigmoid(z) - y) / n;
  }
  return loss / n;
}

double softmax_cross_entropy(std::span<const double> logits, std::size_t target,
                             std::span<double> d_logits) {
  const auto p = softmax(logits);
  if (!d_logits.empty()) {
    for (std::size_t i = 0; i < p.size(); ++i) d_logits[i] = p[i] - (i == target ? 1.0 : 0.0);
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return -(logits[target] - mx - std::log(sum));
}

}  // namespace taonet::nn
