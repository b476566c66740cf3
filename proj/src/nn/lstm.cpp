// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/lstm.hpp"

#include <cmath>
#include <string>

#include "taonet/error.hpp"

namespace taonet::nn {
namespace {

constexpr const char* kGateNames[4] = {"i", "f", "o", "c"};

}  // namespace

LstmParams::LstmParams(const LstmConfig& config) : config_(config) {
  if (config.hidden == 0 || config.input == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "LSTM sizes must be positive");
  }
  const std::size_t cols = config.hidden + config.input;
  embedding_ = params_.add("lstm.embedding", {ingest::kVocabSize, config.input});
  for (std::size_t g = 0; g < 4; ++g) {
    w_[g] = params_.add(std::string("lstm.W_") + kGateNames[g], {config.hidden, cols});
  }
  for (std::size_t g = 0; g < 4; ++g) {
    b_[g] = params_.add(std::string("lstm.b_") + kGateNames[g], {config.hidden});
  }
}

LstmParams::LstmParams(const LstmConfig& config, Rng& rng) : LstmParams(config) {
  const std::size_t fan_in = config.hidden + config.input;
  params_.init_uniform(embedding_, config.input, rng);
  for (std::size_t g = 0; g < 4; ++g) params_.init_uniform(w_[g], fan_in, rng);
  for (std::size_t g = 0; g < 4; ++g) params_.init_uniform(b_[g], fan_in, rng);
}

LstmParams::LstmParams(const LstmConfig& config, std::uint64_t seed) : LstmParams(config) {
  Rng rng(seed);
  *this = LstmParams(config, rng);
}

LstmParams LstmParams::zeros(const LstmConfig& config) { return LstmParams(config); }

std::span<const double> LstmParams::embedding_row(std::uint16_t token) const {
  if (token >= ingest::kVocabSize) {
    throw Error(ErrorCode::kDimensionMismatch, "token " + std::to_string(token) + " outside vocabulary");
  }
  return params_.view(embedding_).subspan(token * config_.input, config_.input);
}

std::span<const double> LstmParams::gate_weights() const {
  const auto first = params_.spec(w_[0]);
  return params_.flat().subspan(first.offset, 4 * first.numel());
}

std::span<const double> LstmParams::gate_biases() const {
  const auto first = params_.spec(b_[0]);
  return params_.flat().subspan(first.offset, 4 * config_.hidden);
}

LstmState lstm_step(const LstmParams& params, const LstmState& state, std::span<const double> x,
                    LstmGates* gates) {
  const std::size_t d = params.hidden();
  if (state.h.size() != d || state.c.size() != d || x.size() != params.input()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "lstm_step: hidden " + std::to_string(d) + ", input " +
                    std::to_string(params.input()) + " vs state " + std::to_string(state.h.size()) +
                    "/" + std::to_string(state.c.size()) + ", x " + std::to_string(x.size()));
  }
  std::vector<double> hx(state.h);
  hx.insert(hx.end(), x.begin(), x.end());
  std::vector<double> z(4 * d);
  matvec(params.gate_weights(), hx, params.gate_biases(), z);

  LstmState next{std::vector<double>(d), std::vector<double>(d)};
  if (gates) {
    gates->input.resize(d);
    gates->forget.resize(d);
    gates->output.resize(d);
    gates->candidate.resize(d);
  }
  for (std::size_t k = 0; k < d; ++k) {
    const double i = sigmoid(z[k]);
    const double f = sigmoid(z[d + k]);
    const double o = sigmoid(z[2 * d + k]);
    const double g = std::tanh(z[3 * d + k]);
    next.c[k] = f * state.c[k] + i * g;
    next.h[k] = o * std::tanh(next.c[k]);
    if (gates) {
      gates->input[k] = i;
      gates->forget[k] = f;
      gates->output[k] = o;
      gates->candidate[k] = g;
    }
  }
  return next;
}

std::vector<double> extract_feature(const LstmParams& params, const ingest::TrafficSample& sample) {
  const std::vector<std::uint16_t>* seq = &sample.tokens;
  const Matrix h = lstm_forward(params, std::span(&seq, 1), nullptr);
  return std::vector<double>(h.row(0).begin(), h.row(0).end());
}

Matrix lstm_forward(const LstmParams& params,
                    std::span<const std::vector<std::uint16_t>* const> batch, LstmTape* tape) {
  const std::size_t d = params.hidden();
  const std::size_t din = params.input();
  const std::size_t cols = d + din;
  const std::size_t nb = batch.size();
  if (nb == 0) return Matrix(0, d);
  const std::size_t steps = batch[0]->size();
  for (const auto* seq : batch) {
    if (seq->size() != steps) {
      throw Error(ErrorCode::kDimensionMismatch, "lstm_forward: unequal sequence lengths");
    }
  }

  // W^T once, so every step is a plain row-major product.
  const auto w = params.gate_weights();
  std::vector<double> wt(cols * 4 * d);
  for (std::size_t r = 0; r < 4 * d; ++r) {
    for (std::size_t c = 0; c < cols; ++c) wt[c * 4 * d + r] = w[r * cols + c];
  }
  const auto bias = params.gate_biases();

  if (tape) {
    tape->batch = nb;
    tape->steps = steps;
    tape->tokens.clear();
    for (const auto* seq : batch) tape->tokens.push_back(*seq);
    tape->hx.assign(steps, Matrix());
    tape->gates.assign(steps, Matrix());
    tape->cell.assign(steps + 1, Matrix());
    tape->cell[0] = Matrix(nb, d);
  }

  Matrix h(nb, d);
  Matrix c(nb, d);
  Matrix hx(nb, cols);
  Matrix z(nb, 4 * d);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < nb; ++b) {
      auto row = hx.row(b);
      std::copy(h.row(b).begin(), h.row(b).end(), row.begin());
      const auto emb = params.embedding_row((*batch[b])[t]);
      std::copy(emb.begin(), emb.end(), row.begin() + static_cast<std::ptrdiff_t>(d));
    }
    gemm_nn(hx.data(), wt.data(), z.data(), nb, cols, 4 * d, false);
    for (std::size_t b = 0; b < nb; ++b) {
      auto zr = z.row(b);
      auto cr = c.row(b);
      auto hr = h.row(b);
      for (std::size_t k = 0; k < 4 * d; ++k) zr[k] += bias[k];
      for (std::size_t k = 0; k < 3 * d; ++k) zr[k] = sigmoid(zr[k]);
      for (std::size_t k = 3 * d; k < 4 * d; ++k) zr[k] = std::tanh(zr[k]);
      for (std::size_t k = 0; k < d; ++k) {
        cr[k] = zr[d + k] * cr[k] + zr[k] * zr[3 * d + k];
        hr[k] = zr[2 * d + k] * std::tanh(cr[k]);
      }
    }
    if (tape) {
      tape->hx[t] = hx;
      tape->gates[t] = z;
      tape->cell[t + 1] = c;
    }
  }
  return h;
}

void lstm_backward(const LstmParams& params, const LstmTape& tape, const Matrix& d_h_final,
                   std::span<double> grad) {
  const std::size_t d = params.hidden();
  const std::size_t din = params.input();
  const std::size_t cols = d + din;
  const std::size_t nb = tape.batch;
  const auto& ps = params.parameters();
  const auto w = params.gate_weights();
  double* dw = grad.data() + ps.spec(params.gate_weight_index(0)).offset;
  double* db = grad.data() + ps.spec(params.gate_bias_index(0)).offset;
  double* demb = grad.data() + ps.spec(params.embedding_index()).offset;

  Matrix dh = d_h_final;
  Matrix dc(nb, d);
  Matrix dz(nb, 4 * d);
  Matrix dhx(nb, cols);
  for (std::size_t t = tape.steps; t-- > 0;) {
    const Matrix& gates = tape.gates[t];
    const Matrix& c_prev = tape.cell[t];
    const Matrix& c_cur = tape.cell[t + 1];
    for (std::size_t b = 0; b < nb; ++b) {
      const auto g = gates.row(b);
      auto dzr = dz.row(b);
      auto dcr = dc.row(b);
      const auto dhr = dh.row(b);
      for (std::size_t k = 0; k < d; ++k) {
        const double i = g[k], f = g[d + k], o = g[2 * d + k], cand = g[3 * d + k];
        const double tc = std::tanh(c_cur(b, k));
        const double d_o = dhr[k] * tc;
        const double dct = dcr[k] + dhr[k] * o * (1.0 - tc * tc);
        dzr[k] = dct * cand * i * (1.0 - i);
        dzr[d + k] = dct * c_prev(b, k) * f * (1.0 - f);
        dzr[2 * d + k] = d_o * o * (1.0 - o);
        dzr[3 * d + k] = dct * i * (1.0 - cand * cand);
        dcr[k] = dct * f;
      }
      for (std::size_t k = 0; k < 4 * d; ++k) db[k] += dzr[k];
    }
    gemm_tn(dz.data(), tape.hx[t].data(), dw, 4 * d, nb, cols, true);
    gemm_nn(dz.data(), w.data(), dhx.data(), nb, 4 * d, cols, false);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto src = dhx.row(b);
      std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(d), dh.row(b).begin());
      double* erow = demb + tape.tokens[b][t] * din;
      for (std::size_t k = 0; k < din; ++k) erow[k] += src[d + k];
    }
  }
}

}  // namespace taonet::nn
