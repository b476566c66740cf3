// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/tensor.hpp"

#include <cmath>
#include <cstring>
#include <vector>

namespace taonet::nn {

namespace {

constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 16;

using V8 = double __attribute__((vector_size(64)));

inline V8 load8(const double* p) {
  V8 v;
  std::memcpy(&v, p, sizeof(V8));
  return v;
}

// C[m x n] (+)= op(A) * B where op(A)(i, p) is a[i*k + p], or a[p*m + i]
// when A is stored transposed. Register tiles of kMr x kNr accumulate
// over the whole of k before touching C.
template <bool kTransA>
void gemm_kernel(const double* __restrict a, const double* __restrict b, double* __restrict c,
                 std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  auto at = [&](std::size_t i, std::size_t p) { return kTransA ? a[p * m + i] : a[i * k + p]; };
  std::size_t i0 = 0;
  for (; i0 + kMr <= m; i0 += kMr) {
    std::size_t j0 = 0;
    for (; j0 + kNr <= n; j0 += kNr) {
      V8 t[kMr][2] = {};
      for (std::size_t p = 0; p < k; ++p) {
        const V8 b0 = load8(b + p * n + j0);
        const V8 b1 = load8(b + p * n + j0 + 8);
        for (std::size_t r = 0; r < kMr; ++r) {
          const double ar = at(i0 + r, p);
          t[r][0] += ar * b0;
          t[r][1] += ar * b1;
        }
      }
      for (std::size_t r = 0; r < kMr; ++r) {
        double* cr = c + (i0 + r) * n + j0;
        if (accumulate) {
          t[r][0] += load8(cr);
          t[r][1] += load8(cr + 8);
        }
        std::memcpy(cr, &t[r][0], sizeof(V8));
        std::memcpy(cr + 8, &t[r][1], sizeof(V8));
      }
    }
    for (std::size_t r = 0; r < kMr && j0 < n; ++r) {
      for (std::size_t j = j0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += at(i0 + r, p) * b[p * n + j];
        double& cij = c[(i0 + r) * n + j];
        cij = accumulate ? cij + acc : acc;
      }
    }
  }
  for (; i0 < m; ++i0) {
    double* ci = c + i0 * n;
    if (!accumulate) std::fill(ci, ci + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double ar = at(i0, p);
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ar * bp[j];
    }
  }
}

}  // namespace

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  gemm_kernel<false>(a, b, c, m, k, n, accumulate);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  // Transposing B keeps the inner loop a contiguous axpy.
  thread_local std::vector<double> bt;
  bt.resize(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b + j * k;
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = bj[p];
  }
  gemm_nn(a, bt.data(), c, m, k, n, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  gemm_kernel<true>(a, b, c, m, k, n, accumulate);
}

void matvec(std::span<const double> w, std::span<const double> x, std::span<const double> bias,
            std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    double acc = bias.empty() ? 0.0 : bias[i];
    const double* wi = w.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += wi[j] * x[j];
    y[i] = acc;
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

std::vector<double> mean_rows(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  if (m.rows() == 0) return out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(m.rows());
  for (double& v : out) v *= inv;
  return out;
}

void snap_to_float(std::span<double> values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace taonet::nn
