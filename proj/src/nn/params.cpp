// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/params.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "taonet/error.hpp"
#include "taonet/nn/tensor.hpp"

namespace taonet::nn {

std::size_t TensorSpec::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t ParameterSet::add(std::string name, std::vector<std::size_t> shape) {
  TensorSpec spec{std::move(name), std::move(shape), values_.size()};
  values_.resize(values_.size() + spec.numel(), 0.0);
  manifest_.push_back(std::move(spec));
  return manifest_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < manifest_.size(); ++i) {
    if (manifest_[i].name == name) return i;
  }
  throw Error(ErrorCode::kDimensionMismatch, "no tensor named '" + name + "'");
}

std::span<double> ParameterSet::view(std::size_t index) {
  const auto& s = manifest_.at(index);
  return std::span<double>(values_).subspan(s.offset, s.numel());
}

std::span<const double> ParameterSet::view(std::size_t index) const {
  const auto& s = manifest_.at(index);
  return std::span<const double>(values_).subspan(s.offset, s.numel());
}

void ParameterSet::init_uniform(std::size_t index, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  auto v = view(index);
  for (double& x : v) x = rng.uniform(-bound, bound);
  snap_to_float(v);
}

void ParameterSet::init_constant(std::size_t index, double value) {
  for (double& x : view(index)) x = value;
}

}  // namespace taonet::nn
