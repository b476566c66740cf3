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

struct EncoderConfig {
  std::size_t dim = 64;
  std::size_t layers = 4;
  std::size_t heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t max_length = ingest::kDefaultSequenceLength;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Pre-norm transformer encoder over byte tokens.
///
/// Layer l maps x to
///   x1 = x + Attn(LN1(x)),   out = x1 + FFN(LN2(x1))
/// with multi-head softmax(QK^T / sqrt(d_k)) V attention and a GELU
/// feed-forward. Inputs are token embeddings plus fixed sinusoidal
/// positions. Pad tokens are dropped from attention and pooling.
class EncoderParams {
 public:
  struct LayerIndex {
    std::size_t ln1_gamma, ln1_beta, wq, bq, wk, bk, wv, bv, wo, bo;
    std::size_t ln2_gamma, ln2_beta, w1, b1, w2, b2;
  };

  EncoderParams() = default;
  EncoderParams(const EncoderConfig& config, std::uint64_t seed);
  EncoderParams(const EncoderConfig& config, Rng& rng);
  static EncoderParams zeros(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }
  std::size_t head_dim() const { return config_.dim / config_.heads; }

  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  std::size_t embedding_index() const { return embedding_; }
  const LayerIndex& layer(std::size_t l) const { return layers_[l]; }

  /// Fixed sinusoidal position table, max_length x dim.
  const Matrix& positions() const { return positions_; }

  friend bool operator==(const EncoderParams& a, const EncoderParams& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  explicit EncoderParams(const EncoderConfig& config);

  EncoderConfig config_;
  ParameterSet params_;
  std::size_t embedding_ = 0;
  std::vector<LayerIndex> layers_;
  Matrix positions_;
};

/// Per-layer activations kept for backpropagation and inspection.
struct EncoderLayerTape {
  Matrix input;                  // n x d
  Matrix ln1, ln2;               // normalized (pre-affine) activations
  std::vector<double> ln1_rstd, ln2_rstd;
  Matrix ln1_out, ln2_out;       // after affine
  Matrix q, k, v;                // n x d
  std::vector<Matrix> attention; // per head, n x n, rows sum to 1
  Matrix context;                // concatenated heads, n x d
  Matrix x1;                     // after attention residual
  Matrix ffn_pre;                // n x ffn
  Matrix ffn_act;                // n x ffn
};

struct EncoderOutput {
  /// F_0 .. F_L: mean over kept positions of the embedding output and of
  /// every layer's output.
  std::vector<std::vector<double>> pooled;
  /// F_L, the representation the classifier head reads.
  std::vector<double> embedding;
  /// Indices of the positions that entered attention (non-pad).
  std::vector<std::size_t> kept_positions;
  std::vector<std::uint16_t> kept_tokens;
  std::vector<EncoderLayerTape> layers;  // filled when a tape is requested
  Matrix final_hidden;                   // n x d, layer L output
};

/// Throws Error{kDimensionMismatch} if the sample exceeds max_length or the
/// config is inconsistent.
EncoderOutput encoder_forward(const EncoderParams& params, const ingest::TrafficSample& sample,
                              bool keep_tape = false);

/// Backpropagates dL/dF_L (gradient w.r.t. the pooled final state) through a
/// taped forward pass, accumulating into `grad`.
void encoder_backward(const EncoderParams& params, const EncoderOutput& tape,
                      std::span<const double> d_embedding, std::span<double> grad);

}  // namespace taonet::nn
