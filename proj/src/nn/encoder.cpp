// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/encoder.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "taonet/error.hpp"

namespace taonet::nn {
namespace {

constexpr double kLayerNormEps = 1e-5;
const double kGeluScale = std::sqrt(2.0 / std::numbers::pi);

double gelu(double u) {
  return 0.5 * u * (1.0 + std::tanh(kGeluScale * (u + 0.044715 * u * u * u)));
}

double gelu_grad(double u) {
  const double inner = kGeluScale * (u + 0.044715 * u * u * u);
  const double t = std::tanh(inner);
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * 0.044715 * u * u);
}

// y = x W^T + b for W (out x in).
void linear(const Matrix& x, std::span<const double> w, std::span<const double> b, Matrix& y,
            std::size_t out) {
  y.resize(x.rows(), out);
  gemm_nt(x.data(), w.data(), y.data(), x.rows(), x.cols(), out, false);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t c = 0; c < out; ++c) row[c] += b[c];
  }
}

// Accumulates dW += dy^T x, db += colsum(dy); returns dx = dy W.
Matrix linear_backward(const Matrix& x, std::span<const double> w, const Matrix& dy, double* dw,
                       double* db) {
  const std::size_t n = x.rows(), in = x.cols(), out = dy.cols();
  gemm_tn(dy.data(), x.data(), dw, out, n, in, true);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = dy.row(r);
    for (std::size_t c = 0; c < out; ++c) db[c] += row[c];
  }
  Matrix dx(n, in);
  gemm_nn(dy.data(), w.data(), dx.data(), n, out, in, false);
  return dx;
}

void layer_norm(const Matrix& x, std::span<const double> gamma, std::span<const double> beta,
                Matrix& xhat, std::vector<double>& rstd, Matrix& y) {
  const std::size_t n = x.rows(), d = x.cols();
  xhat.resize(n, d);
  y.resize(n, d);
  rstd.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t c = 0; c < d; ++c) {
      xhat(r, c) = (row[c] - mean) * rstd[r];
      y(r, c) = gamma[c] * xhat(r, c) + beta[c];
    }
  }
}

// Adds the input gradient of a layer norm to dx.
void layer_norm_backward(const Matrix& dy, const Matrix& xhat, const std::vector<double>& rstd,
                         std::span<const double> gamma, double* dgamma, double* dbeta, Matrix& dx) {
  const std::size_t n = dy.rows(), d = dy.cols();
  std::vector<double> dxhat(d);
  for (std::size_t r = 0; r < n; ++r) {
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      dgamma[c] += dy(r, c) * xhat(r, c);
      dbeta[c] += dy(r, c);
      dxhat[c] = dy(r, c) * gamma[c];
      mean_dxhat += dxhat[c];
      mean_dxhat_xhat += dxhat[c] * xhat(r, c);
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    for (std::size_t c = 0; c < d; ++c) {
      dx(r, c) += rstd[r] * (dxhat[c] - mean_dxhat - xhat(r, c) * mean_dxhat_xhat);
    }
  }
}

void copy_columns(const Matrix& src, std::size_t from, std::size_t width, Matrix& dst) {
  dst.resize(src.rows(), width);
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) dst(r, c) = src(r, from + c);
  }
}

void write_columns(const Matrix& src, std::size_t from, Matrix& dst) {
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t c = 0; c < src.cols(); ++c) dst(r, from + c) = src(r, c);
  }
}

}  // namespace

EncoderParams::EncoderParams(const EncoderConfig& config) : config_(config) {
  if (config.dim == 0 || config.heads == 0 || config.dim % config.heads != 0 ||
      config.ffn_dim == 0 || config.max_length == 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "encoder dim " + std::to_string(config.dim) + " must be a positive multiple of heads " +
                    std::to_string(config.heads));
  }
  const std::size_t d = config.dim;
  embedding_ = params_.add("enc.embedding", {ingest::kVocabSize, d});
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "enc.layer" + std::to_string(l) + ".";
    LayerIndex li{};
    li.ln1_gamma = params_.add(p + "ln1.gamma", {d});
    li.ln1_beta = params_.add(p + "ln1.beta", {d});
    li.wq = params_.add(p + "attn.W_q", {d, d});
    li.bq = params_.add(p + "attn.b_q", {d});
    li.wk = params_.add(p + "attn.W_k", {d, d});
    li.bk = params_.add(p + "attn.b_k", {d});
    li.wv = params_.add(p + "attn.W_v", {d, d});
    li.bv = params_.add(p + "attn.b_v", {d});
    li.wo = params_.add(p + "attn.W_o", {d, d});
    li.bo = params_.add(p + "attn.b_o", {d});
    li.ln2_gamma = params_.add(p + "ln2.gamma", {d});
    li.ln2_beta = params_.add(p + "ln2.beta", {d});
    li.w1 = params_.add(p + "ffn.W_1", {config.ffn_dim, d});
    li.b1 = params_.add(p + "ffn.b_1", {config.ffn_dim});
    li.w2 = params_.add(p + "ffn.W_2", {d, config.ffn_dim});
    li.b2 = params_.add(p + "ffn.b_2", {d});
    layers_.push_back(li);
  }
  positions_ = Matrix(config.max_length, d);
  for (std::size_t pos = 0; pos < config.max_length; ++pos) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double angle = static_cast<double>(pos) /
                           std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
      positions_(pos, i) = std::sin(angle);
      if (i + 1 < d) positions_(pos, i + 1) = std::cos(angle);
    }
  }
}

EncoderParams::EncoderParams(const EncoderConfig& config, Rng& rng) : EncoderParams(config) {
  const std::size_t d = config.dim;
  params_.init_uniform(embedding_, d, rng);
  for (const auto& li : layers_) {
    params_.init_constant(li.ln1_gamma, 1.0);
    params_.init_constant(li.ln2_gamma, 1.0);
    for (auto idx : {li.wq, li.bq, li.wk, li.bk, li.wv, li.bv, li.wo, li.bo, li.w1, li.b1}) {
      params_.init_uniform(idx, d, rng);
    }
    params_.init_uniform(li.w2, config.ffn_dim, rng);
    params_.init_uniform(li.b2, config.ffn_dim, rng);
  }
}

EncoderParams::EncoderParams(const EncoderConfig& config, std::uint64_t seed)
    : EncoderParams(config) {
  Rng rng(seed);
  *this = EncoderParams(config, rng);
}

EncoderParams EncoderParams::zeros(const EncoderConfig& config) { return EncoderParams(config); }

EncoderOutput encoder_forward(const EncoderParams& params, const ingest::TrafficSample& sample,
                              bool keep_tape) {
  const auto& cfg = params.config();
  const auto& ps = params.parameters();
  const std::size_t d = cfg.dim;
  const std::size_t dk = params.head_dim();
  if (sample.tokens.size() > cfg.max_length) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample length " + std::to_string(sample.tokens.size()) + " exceeds encoder maximum " +
                    std::to_string(cfg.max_length));
  }

  EncoderOutput out;
  for (std::size_t p = 0; p < sample.tokens.size(); ++p) {
    if (sample.tokens[p] != ingest::kPadToken) out.kept_positions.push_back(p);
  }
  if (out.kept_positions.empty()) {
    // All padding: nothing to mask against, so attend over every position.
    for (std::size_t p = 0; p < sample.tokens.size(); ++p) out.kept_positions.push_back(p);
  }
  const std::size_t n = out.kept_positions.size();
  for (auto p : out.kept_positions) out.kept_tokens.push_back(sample.tokens[p]);

  Matrix x(n, d);
  const auto emb = ps.view(params.embedding_index());
  for (std::size_t r = 0; r < n; ++r) {
    const auto tok = out.kept_tokens[r];
    if (tok >= ingest::kVocabSize) throw Error(ErrorCode::kDimensionMismatch, "token out of vocabulary");
    for (std::size_t c = 0; c < d; ++c) {
      x(r, c) = emb[tok * d + c] + params.positions()(out.kept_positions[r], c);
    }
  }
  out.pooled.push_back(mean_rows(x));

  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const auto& li = params.layer(l);
    EncoderLayerTape t;
    t.input = x;
    layer_norm(x, ps.view(li.ln1_gamma), ps.view(li.ln1_beta), t.ln1, t.ln1_rstd, t.ln1_out);
    linear(t.ln1_out, ps.view(li.wq), ps.view(li.bq), t.q, d);
    linear(t.ln1_out, ps.view(li.wk), ps.view(li.bk), t.k, d);
    linear(t.ln1_out, ps.view(li.wv), ps.view(li.bv), t.v, d);

    t.context = Matrix(n, d);
    Matrix qh, kh, vh, oh(n, dk);
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      copy_columns(t.q, h * dk, dk, qh);
      copy_columns(t.k, h * dk, dk, kh);
      copy_columns(t.v, h * dk, dk, vh);
      Matrix scores(n, n);
      gemm_nt(qh.data(), kh.data(), scores.data(), n, dk, n, false);
      for (std::size_t r = 0; r < n; ++r) {
        auto row = scores.row(r);
        double mx = row[0] * scale;
        for (double& s : row) {
          s *= scale;
          mx = std::max(mx, s);
        }
        double sum = 0.0;
        for (double& s : row) {
          s = std::exp(s - mx);
          sum += s;
        }
        for (double& s : row) s /= sum;
      }
      gemm_nn(scores.data(), vh.data(), oh.data(), n, n, dk, false);
      write_columns(oh, h * dk, t.context);
      t.attention.push_back(std::move(scores));
    }

    Matrix attn_out;
    linear(t.context, ps.view(li.wo), ps.view(li.bo), attn_out, d);
    t.x1 = t.input;
    for (std::size_t i = 0; i < t.x1.size(); ++i) t.x1.data()[i] += attn_out.data()[i];

    layer_norm(t.x1, ps.view(li.ln2_gamma), ps.view(li.ln2_beta), t.ln2, t.ln2_rstd, t.ln2_out);
    linear(t.ln2_out, ps.view(li.w1), ps.view(li.b1), t.ffn_pre, cfg.ffn_dim);
    t.ffn_act = t.ffn_pre;
    for (double& v : t.ffn_act.flat()) v = gelu(v);
    Matrix ffn_out;
    linear(t.ffn_act, ps.view(li.w2), ps.view(li.b2), ffn_out, d);
    x = t.x1;
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += ffn_out.data()[i];

    out.pooled.push_back(mean_rows(x));
    if (keep_tape) out.layers.push_back(std::move(t));
  }
  out.embedding = out.pooled.back();
  out.final_hidden = std::move(x);
  return out;
}

void encoder_backward(const EncoderParams& params, const EncoderOutput& tape,
                      std::span<const double> d_embedding, std::span<double> grad) {
  const auto& cfg = params.config();
  const auto& ps = params.parameters();
  if (tape.layers.size() != cfg.layers) {
    throw Error(ErrorCode::kDimensionMismatch, "encoder_backward needs a taped forward pass");
  }
  const std::size_t d = cfg.dim;
  const std::size_t dk = params.head_dim();
  const std::size_t n = tape.kept_positions.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  auto g = [&](std::size_t idx) { return grad.data() + ps.spec(idx).offset; };

  Matrix dx(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) dx(r, c) = d_embedding[c] / static_cast<double>(n);
  }

  for (std::size_t l = cfg.layers; l-- > 0;) {
    const auto& li = params.layer(l);
    const auto& t = tape.layers[l];

    // Feed-forward block; the residual passes dx straight through to x1.
    Matrix d_act = linear_backward(t.ffn_act, ps.view(li.w2), dx, g(li.w2), g(li.b2));
    for (std::size_t i = 0; i < d_act.size(); ++i) d_act.data()[i] *= gelu_grad(t.ffn_pre.data()[i]);
    Matrix d_ln2 = linear_backward(t.ln2_out, ps.view(li.w1), d_act, g(li.w1), g(li.b1));
    Matrix dx1 = dx;
    layer_norm_backward(d_ln2, t.ln2, t.ln2_rstd, ps.view(li.ln2_gamma), g(li.ln2_gamma),
                        g(li.ln2_beta), dx1);

    // Attention block.
    Matrix d_context = linear_backward(t.context, ps.view(li.wo), dx1, g(li.wo), g(li.bo));
    Matrix dq(n, d), dkm(n, d), dv(n, d);
    Matrix qh, kh, vh, doh, dp(n, n), dvh(n, dk), dqh(n, dk), dkh(n, dk);
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      const Matrix& p = t.attention[h];
      copy_columns(t.q, h * dk, dk, qh);
      copy_columns(t.k, h * dk, dk, kh);
      copy_columns(t.v, h * dk, dk, vh);
      copy_columns(d_context, h * dk, dk, doh);
      gemm_nt(doh.data(), vh.data(), dp.data(), n, dk, n, false);
      gemm_tn(p.data(), doh.data(), dvh.data(), n, n, dk, false);
      for (std::size_t r = 0; r < n; ++r) {
        double row_dot = 0.0;
        for (std::size_t c = 0; c < n; ++c) row_dot += dp(r, c) * p(r, c);
        for (std::size_t c = 0; c < n; ++c) dp(r, c) = p(r, c) * (dp(r, c) - row_dot) * scale;
      }
      gemm_nn(dp.data(), kh.data(), dqh.data(), n, n, dk, false);
      gemm_tn(dp.data(), qh.data(), dkh.data(), n, n, dk, false);
      write_columns(dqh, h * dk, dq);
      write_columns(dkh, h * dk, dkm);
      write_columns(dvh, h * dk, dv);
    }
    Matrix d_ln1 = linear_backward(t.ln1_out, ps.view(li.wq), dq, g(li.wq), g(li.bq));
    const Matrix d_ln1_k = linear_backward(t.ln1_out, ps.view(li.wk), dkm, g(li.wk), g(li.bk));
    const Matrix d_ln1_v = linear_backward(t.ln1_out, ps.view(li.wv), dv, g(li.wv), g(li.bv));
    for (std::size_t i = 0; i < d_ln1.size(); ++i) {
      d_ln1.data()[i] += d_ln1_k.data()[i] + d_ln1_v.data()[i];
    }
    dx = dx1;
    layer_norm_backward(d_ln1, t.ln1, t.ln1_rstd, ps.view(li.ln1_gamma), g(li.ln1_gamma),
                        g(li.ln1_beta), dx);
  }

  double* demb = g(params.embedding_index());
  for (std::size_t r = 0; r < n; ++r) {
    double* row = demb + tape.kept_tokens[r] * d;
    for (std::size_t c = 0; c < d; ++c) row[c] += dx(r, c);
  }
}

}  // namespace taonet::nn
