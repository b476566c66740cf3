// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "taonet/nn/params.hpp"
#include "taonet/nn/tensor.hpp"

namespace taonet::nn {

/// Affine map logits = W x + b with W (outputs x inputs).
class LinearHead {
 public:
  LinearHead() = default;
  LinearHead(std::size_t outputs, std::size_t inputs);  // zeros
  LinearHead(std::size_t outputs, std::size_t inputs, Rng& rng);

  std::size_t outputs() const { return outputs_; }
  std::size_t inputs() const { return inputs_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  std::span<double> weights() { return params_.view(0); }
  std::span<const double> weights() const { return params_.view(0); }
  std::span<double> bias() { return params_.view(1); }
  std::span<const double> bias() const { return params_.view(1); }

  std::vector<double> forward(std::span<const double> x) const;
  /// Accumulates dW, db into `grad` and returns dL/dx.
  std::vector<double> backward(std::span<const double> x, std::span<const double> d_logits,
                               std::span<double> grad) const;

  friend bool operator==(const LinearHead&, const LinearHead&) = default;

 private:
  std::size_t outputs_ = 0;
  std::size_t inputs_ = 0;
  ParameterSet params_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Mean of elementwise binary cross-entropy on logits; writes dL/dlogits
/// (already divided by the element count) when `d_logits` is non-empty.
double bce_with_logits(std::span<const double> logits, std::span<const double> targets,
                       std::span<double> d_logits);

/// -log softmax(logits)[target]; writes dL/dlogits when non-empty.
double softmax_cross_entropy(std::span<const double> logits, std::size_t target,
                             std::span<double> d_logits);

}  // namespace taonet::nn
