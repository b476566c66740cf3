// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "taonet/rng.hpp"

namespace taonet::nn {

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;

  std::size_t numel() const;
  friend bool operator==(const TensorSpec&, const TensorSpec&) = default;
};

/// Named tensors packed into one flat buffer, in registration order.
/// Optimizers, gradient checks and checkpoints all work on the flat view.
class ParameterSet {
 public:
  /// Registers a tensor and returns its index.
  std::size_t add(std::string name, std::vector<std::size_t> shape);

  std::size_t index_of(const std::string& name) const;
  const TensorSpec& spec(std::size_t index) const { return manifest_[index]; }
  const std::vector<TensorSpec>& manifest() const { return manifest_; }

  std::span<double> view(std::size_t index);
  std::span<const double> view(std::size_t index) const;
  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn in tensor order,
  /// then rounded to float32 so a checkpoint round trip is exact.
  void init_uniform(std::size_t index, std::size_t fan_in, Rng& rng);
  void init_constant(std::size_t index, double value);

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<TensorSpec> manifest_;
  std::vector<double> values_;
};

}  // namespace taonet::nn
