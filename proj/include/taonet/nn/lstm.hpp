// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "taonet/ingest/dataset.hpp"
#include "taonet/nn/params.hpp"
#include "taonet/nn/tensor.hpp"

namespace taonet::nn {

struct LstmConfig {
  std::size_t hidden = 64;  // d
  std::size_t input = 64;   // d_in, token embedding width

  friend bool operator==(const LstmConfig&, const LstmConfig&) = default;
};

/// LSTM feature extractor: a 257-entry token embedding feeding a single
/// LSTM layer. Gate weights W_i, W_f, W_o, W_c (each d x (d + d_in), acting
/// on [h_{t-1}, x_t]) are stored back to back, so together they form one
/// 4d x (d + d_in) matrix; biases likewise.
class LstmParams {
 public:
  LstmParams() = default;
  LstmParams(const LstmConfig& config, std::uint64_t seed);
  LstmParams(const LstmConfig& config, Rng& rng);
  /// Zero-initialized parameters with the given shapes.
  static LstmParams zeros(const LstmConfig& config);

  const LstmConfig& config() const { return config_; }
  std::size_t hidden() const { return config_.hidden; }
  std::size_t input() const { return config_.input; }

  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  std::span<const double> embedding_row(std::uint16_t token) const;
  /// Stacked gate weights [W_i; W_f; W_o; W_c], 4d x (d + d_in).
  std::span<const double> gate_weights() const;
  /// Stacked gate biases [b_i; b_f; b_o; b_c], 4d.
  std::span<const double> gate_biases() const;

  std::size_t embedding_index() const { return embedding_; }
  std::size_t gate_weight_index(std::size_t gate) const { return w_[gate]; }
  std::size_t gate_bias_index(std::size_t gate) const { return b_[gate]; }

  friend bool operator==(const LstmParams&, const LstmParams&) = default;

 private:
  explicit LstmParams(const LstmConfig& config);

  LstmConfig config_;
  ParameterSet params_;
  std::size_t embedding_ = 0;
  std::size_t w_[4] = {};
  std::size_t b_[4] = {};
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState zeros(std::size_t hidden) { return {std::vector<double>(hidden, 0.0), std::vector<double>(hidden, 0.0)}; }
};

/// Gate activations of one step, exposed for inspection.
struct LstmGates {
  std::vector<double> input, forget, output, candidate;
};

/// One recurrence step:
///   i = s(W_i[h,x] + b_i), f = s(W_f[h,x] + b_f), o = s(W_o[h,x] + b_o),
///   c~ = tanh(W_c[h,x] + b_c), c' = f*c + i*c~, h' = o*tanh(c').
/// Throws Error{kDimensionMismatch} on shape disagreement.
LstmState lstm_step(const LstmParams& params, const LstmState& state, std::span<const double> x,
                    LstmGates* gates = nullptr);

/// h_j after scanning every token (padding included) from a zero state.
std::vector<double> extract_feature(const LstmParams& params, const ingest::TrafficSample& sample);

/// Cached activations of a batched forward pass, for backpropagation.
struct LstmTape {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<std::vector<std::uint16_t>> tokens;  // per sample
  std::vector<Matrix> hx;     // [h_{t-1}, x_t], batch x (d + d_in)
  std::vector<Matrix> gates;  // activated [i f o c~], batch x 4d
  std::vector<Matrix> cell;   // c_t, batch x d; cell[0] is the zero state
};

/// Runs equal-length token sequences together; returns h_T (batch x d).
Matrix lstm_forward(const LstmParams& params,
                    std::span<const std::vector<std::uint16_t>* const> batch, LstmTape* tape);

/// Backpropagates dL/dh_T through the tape, accumulating into `grad`
/// (laid out like params.parameters().flat()).
void lstm_backward(const LstmParams& params, const LstmTape& tape, const Matrix& d_h_final,
                   std::span<double> grad);

}  // namespace taonet::nn
