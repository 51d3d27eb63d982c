// Copyright 2026 The HOI Anticipation Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Dense kernels. Every parallel kernel has a `_serial` reference twin with
// the same per-element floating-point operation order, so the two are
// bitwise comparable in tests. Parallel variants split work across rows
// (or attention segments); no reduction ever crosses a thread boundary.

#ifndef HOI_KERNELS_H_
#define HOI_KERNELS_H_

#include <cmath>
#include <cstddef>
#include <vector>

#include "hoi/tensor.h"

namespace hoi {

// ---------------------------------------------------------------------------
// matmul: C[m x n] = A[m x k] * B[k x n]
// ---------------------------------------------------------------------------

template <typename T>
void matmul_serial_raw(const T* a, const T* b, T* c, std::size_t m,
                       std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

// Row-parallel ikj loop. Each output element accumulates over p in the same
// order as the serial reference, so results are bitwise identical.
template <typename T>
void matmul_raw(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
                std::size_t n) {
#pragma omp parallel for schedule(static) if (m * n * k > 16384)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    T* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x n] = A[m x k] * B[n x k]^T  (rows of B are the right-hand columns)
template <typename T>
void matmul_nt_serial_raw(const T* a, const T* b, T* c, std::size_t m,
                          std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
  }
}

template <typename T>
void matmul_nt_raw(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
                   std::size_t n) {
#pragma omp parallel for schedule(static) if (m * n * k > 16384)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      const T* arow = a + i * k;
      const T* brow = b + j * k;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[i * n + j] = acc;
    }
  }
}

// C[m x n] = A[k x m]^T * B[k x n]
template <typename T>
void matmul_tn_serial_raw(const T* a, const T* b, T* c, std::size_t m,
                          std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

template <typename T>
void matmul_tn_raw(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
                   std::size_t n) {
#pragma omp parallel for schedule(static) if (m * n * k > 16384)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.shape[1] != b.shape[0]) {
    throw ShapeError("matmul: incompatible shapes " + shape_to_string(a.shape) +
                     " and " + shape_to_string(b.shape));
  }
  TensorT<T> c({a.shape[0], b.shape[1]});
  matmul_raw(a.data.data(), b.data.data(), c.data.data(), a.shape[0], a.shape[1], b.shape[1]);
  return c;
}

template <typename T>
TensorT<T> matmul_serial(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.shape[1] != b.shape[0]) {
    throw ShapeError("matmul: incompatible shapes " + shape_to_string(a.shape) +
                     " and " + shape_to_string(b.shape));
  }
  TensorT<T> c({a.shape[0], b.shape[1]});
  matmul_serial_raw(a.data.data(), b.data.data(), c.data.data(), a.shape[0], a.shape[1], b.shape[1]);
  return c;
}

// ---------------------------------------------------------------------------
// Row-wise softmax with max subtraction.
// ---------------------------------------------------------------------------

template <typename T>
void softmax_row(const T* x, T* y, std::size_t n) {
  T mx = x[0];
  for (std::size_t j = 1; j < n; ++j) mx = x[j] > mx ? x[j] : mx;
  T sum = T(0);
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = std::exp(x[j] - mx);
    sum += y[j];
  }
  const T inv = T(1) / sum;
  for (std::size_t j = 0; j < n; ++j) y[j] *= inv;
}

template <typename T>
void softmax_rows_serial_raw(const T* x, T* y, std::size_t rows, std::size_t n) {
  for (std::size_t i = 0; i < rows; ++i) softmax_row(x + i * n, y + i * n, n);
}

template <typename T>
void softmax_rows_raw(const T* x, T* y, std::size_t rows, std::size_t n) {
#pragma omp parallel for schedule(static) if (rows * n > 4096)
  for (long long i = 0; i < static_cast<long long>(rows); ++i) {
    softmax_row(x + i * n, y + i * n, n);
  }
}

// axis 1 normalizes each row, axis 0 each column.
template <typename T>
TensorT<T> softmax(const TensorT<T>& x, int axis) {
  if (x.ndim() != 2) throw ShapeError("softmax: expected 2-D tensor");
  if (axis != 0 && axis != 1) throw ContractError("softmax: axis must be 0 or 1");
  for (T v : x.data) {
    if (std::isnan(v)) throw ContractError("softmax: NaN input");
  }
  if (axis == 1) {
    TensorT<T> y(x.shape);
    softmax_rows_raw(x.data.data(), y.data.data(), x.shape[0], x.shape[1]);
    return y;
  }
  // Column softmax via transposed views.
  const std::size_t r = x.shape[0], c = x.shape[1];
  TensorT<T> xt({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) xt.at(j, i) = x.at(i, j);
  TensorT<T> yt(xt.shape);
  softmax_rows_raw(xt.data.data(), yt.data.data(), c, r);
  TensorT<T> y(x.shape);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y.at(i, j) = yt.at(j, i);
  return y;
}

// ---------------------------------------------------------------------------
// Layer norm over the last axis.
// ---------------------------------------------------------------------------

template <typename T>
void layer_norm_row(const T* x, const T* gain, const T* bias, T eps, T* y,
                    std::size_t n) {
  T mean = T(0);
  for (std::size_t j = 0; j < n; ++j) mean += x[j];
  mean /= static_cast<T>(n);
  T var = T(0);
  for (std::size_t j = 0; j < n; ++j) {
    const T d = x[j] - mean;
    var += d * d;
  }
  var /= static_cast<T>(n);
  const T inv = T(1) / std::sqrt(var + eps);
  for (std::size_t j = 0; j < n; ++j) y[j] = (x[j] - mean) * inv * gain[j] + bias[j];
}

template <typename T>
void layer_norm_rows_raw(const T* x, const T* gain, const T* bias, T eps, T* y,
                         std::size_t rows, std::size_t n) {
#pragma omp parallel for schedule(static) if (rows * n > 4096)
  for (long long i = 0; i < static_cast<long long>(rows); ++i) {
    layer_norm_row(x + i * n, gain, bias, eps, y + i * n, n);
  }
}

template <typename T>
TensorT<T> layer_norm(const TensorT<T>& x, const TensorT<T>& gain,
                      const TensorT<T>& bias, T eps = T(1e-5)) {
  if (x.ndim() != 2) throw ShapeError("layer_norm: expected 2-D tensor");
  const std::size_t n = x.shape[1];
  if (gain.size() != n || bias.size() != n) {
    throw ShapeError("layer_norm: gain/bias width mismatch");
  }
  if (!(eps > T(0))) throw ContractError("layer_norm: eps must be positive");
  TensorT<T> y(x.shape);
  layer_norm_rows_raw(x.data.data(), gain.data.data(), bias.data.data(), eps,
                      y.data.data(), x.shape[0], n);
  return y;
}

// ---------------------------------------------------------------------------
// 2-D average pooling, stride equals the kernel (non-overlapping windows).
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> avg_pool2d(const TensorT<T>& x, std::size_t kh, std::size_t kw) {
  if (x.ndim() != 2) throw ShapeError("avg_pool2d: expected 2-D tensor");
  const std::size_t h = x.shape[0], w = x.shape[1];
  if (kh == 0 || kw == 0 || h % kh != 0 || w % kw != 0) {
    throw ShapeError("avg_pool2d: extents " + shape_to_string(x.shape) +
                     " not divisible by kernel " + std::to_string(kh) + "x" +
                     std::to_string(kw));
  }
  TensorT<T> y({h / kh, w / kw});
  const T inv = T(1) / static_cast<T>(kh * kw);
  for (std::size_t oi = 0; oi < h / kh; ++oi) {
    for (std::size_t oj = 0; oj < w / kw; ++oj) {
      T acc = T(0);
      for (std::size_t a = 0; a < kh; ++a)
        for (std::size_t b = 0; b < kw; ++b) acc += x.at(oi * kh + a, oj * kw + b);
      y.at(oi, oj) = acc * inv;
    }
  }
  return y;
}

// ---------------------------------------------------------------------------
// Scaled dot-product attention core over flattened batch segments.
//
// q, k, v are (batch * len) x width matrices already projected; each batch
// segment of `len` rows attends only within itself. `probs` receives the
// softmax weights, laid out as batch * heads blocks of len x len.
// ---------------------------------------------------------------------------

template <typename T>
void sdpa_segment(const T* q, const T* k, const T* v, T* out, T* probs,
                  std::size_t lq, std::size_t lk, std::size_t width,
                  std::size_t heads, T* scores) {
  const std::size_t hd = width / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(hd));
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * hd;
    for (std::size_t i = 0; i < lq; ++i) {
      for (std::size_t j = 0; j < lk; ++j) {
        T acc = T(0);
        for (std::size_t p = 0; p < hd; ++p)
          acc += q[i * width + off + p] * k[j * width + off + p];
        scores[i * lk + j] = acc * scale;
      }
    }
    T* hp = probs + h * lq * lk;
    softmax_rows_serial_raw(scores, hp, lq, lk);
    for (std::size_t i = 0; i < lq; ++i) {
      for (std::size_t p = 0; p < hd; ++p) {
        T acc = T(0);
        for (std::size_t j = 0; j < lk; ++j) acc += hp[i * lk + j] * v[j * width + off + p];
        out[i * width + off + p] = acc;
      }
    }
  }
}

template <typename T>
void sdpa_serial_raw(const T* q, const T* k, const T* v, T* out, T* probs,
                     std::size_t batch, std::size_t lq, std::size_t lk,
                     std::size_t width, std::size_t heads) {
  std::vector<T> scores(lq * lk);
  for (std::size_t b = 0; b < batch; ++b) {
    sdpa_segment(q + b * lq * width, k + b * lk * width, v + b * lk * width,
                 out + b * lq * width, probs + b * heads * lq * lk, lq, lk,
                 width, heads, scores.data());
  }
}

// Parallel over batch segments; each segment is independent and uses a
// per-thread score scratch buffer. Small workloads stay serial.
template <typename T>
void sdpa_raw(const T* q, const T* k, const T* v, T* out, T* probs,
              std::size_t batch, std::size_t lq, std::size_t lk,
              std::size_t width, std::size_t heads) {
  const std::size_t work = batch * lq * lk * width;
#pragma omp parallel if (batch > 1 && work > 1000000)
  {
    std::vector<T> scores(lq * lk);
#pragma omp for schedule(static)
    for (long long b = 0; b < static_cast<long long>(batch); ++b) {
      sdpa_segment(q + b * lq * width, k + b * lk * width, v + b * lk * width,
                   out + b * lq * width, probs + b * heads * lq * lk, lq, lk,
                   width, heads, scores.data());
    }
  }
}

}  // namespace hoi

#endif  // HOI_KERNELS_H_
