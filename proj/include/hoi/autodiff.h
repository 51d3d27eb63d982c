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
// Reverse-mode automatic differentiation over a linear tape. Ops append
// nodes in creation order, which is a topological order, so the backward
// pass is a single reverse sweep. Gradients accumulate additively when a
// value feeds several consumers. A tape is single-owner: build it, call
// backward once, read gradients, drop it.

#ifndef HOI_AUTODIFF_H_
#define HOI_AUTODIFF_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hoi/kernels.h"
#include "hoi/prng.h"
#include "hoi/tensor.h"

namespace hoi {

template <typename T>
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void set_grad_enabled(bool e) { grad_enabled_ = e; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  Var<T> input(TensorT<T> v) { return push(std::move(v), false, nullptr); }
  Var<T> param(TensorT<T> v) { return push(std::move(v), grad_enabled_, nullptr); }

  const TensorT<T>& val(Var<T> x) const { return nodes_[x.id].value; }

  const TensorT<T>& grad(Var<T> x) {
    Node& n = nodes_[x.id];
    if (n.grad.size() == 0) n.grad = TensorT<T>::zeros(n.value.shape);
    return n.grad;
  }

  bool requires_grad(Var<T> x) const { return nodes_[x.id].requires_grad; }

  // -------------------------------------------------------------------------
  // Elementwise / structural ops
  // -------------------------------------------------------------------------

  Var<T> add(Var<T> a, Var<T> b) {
    check_same_shape("add", a, b);
    TensorT<T> out(val(a).shape);
    const std::size_t n = out.size();
    const T* pa = val(a).data.data();
    const T* pb = val(b).data.data();
    for (std::size_t i = 0; i < n; ++i) out.data[i] = pa[i] + pb[i];
    return push_op(std::move(out), {a, b}, [a, b](Tape& t, const Node& o) {
      t.accumulate(a, o.grad.data.data(), o.grad.size());
      t.accumulate(b, o.grad.data.data(), o.grad.size());
    });
  }

  Var<T> mul(Var<T> a, Var<T> b) {
    check_same_shape("mul", a, b);
    TensorT<T> out(val(a).shape);
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out.data[i] = val(a).data[i] * val(b).data[i];
    return push_op(std::move(out), {a, b}, [a, b](Tape& t, const Node& o) {
      if (t.nodes_[a.id].requires_grad) {
        TensorT<T>& ga = t.ensure_grad(a);
        const TensorT<T>& vb = t.val(b);
        for (std::size_t i = 0; i < o.grad.size(); ++i) ga.data[i] += o.grad.data[i] * vb.data[i];
      }
      if (t.nodes_[b.id].requires_grad) {
        TensorT<T>& gb = t.ensure_grad(b);
        const TensorT<T>& va = t.val(a);
        for (std::size_t i = 0; i < o.grad.size(); ++i) gb.data[i] += o.grad.data[i] * va.data[i];
      }
    });
  }

  Var<T> scale(Var<T> a, T c) {
    TensorT<T> out(val(a).shape);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = val(a).data[i] * c;
    return push_op(std::move(out), {a}, [a, c](Tape& t, const Node& o) {
      TensorT<T>& ga = t.ensure_grad(a);
      for (std::size_t i = 0; i < o.grad.size(); ++i) ga.data[i] += o.grad.data[i] * c;
    });
  }

  Var<T> concat_rows(const std::vector<Var<T>>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: empty part list");
    const std::size_t c = val(parts[0]).cols();
    std::size_t r = 0;
    for (Var<T> p : parts) {
      if (val(p).cols() != c) throw ShapeError("concat_rows: column mismatch");
      r += val(p).rows();
    }
    TensorT<T> out({r, c});
    std::size_t row = 0;
    for (Var<T> p : parts) {
      const TensorT<T>& v = val(p);
      std::copy(v.data.begin(), v.data.end(), out.data.begin() + row * c);
      row += v.rows();
    }
    std::vector<Var<T>> in = parts;
    return push_op(std::move(out), in, [in, c](Tape& t, const Node& o) {
      std::size_t row = 0;
      for (Var<T> p : in) {
        const std::size_t pr = t.val(p).rows();
        if (t.nodes_[p.id].requires_grad) {
          TensorT<T>& g = t.ensure_grad(p);
          for (std::size_t i = 0; i < pr * c; ++i) g.data[i] += o.grad.data[row * c + i];
        }
        row += pr;
      }
    });
  }

  Var<T> concat_cols(Var<T> a, Var<T> b) {
    const TensorT<T>& va = val(a);
    const TensorT<T>& vb = val(b);
    if (va.rows() != vb.rows()) throw ShapeError("concat_cols: row mismatch");
    const std::size_t r = va.rows(), ca = va.cols(), cb = vb.cols();
    TensorT<T> out({r, ca + cb});
    for (std::size_t i = 0; i < r; ++i) {
      std::copy(va.data.begin() + i * ca, va.data.begin() + (i + 1) * ca,
                out.data.begin() + i * (ca + cb));
      std::copy(vb.data.begin() + i * cb, vb.data.begin() + (i + 1) * cb,
                out.data.begin() + i * (ca + cb) + ca);
    }
    return push_op(std::move(out), {a, b}, [a, b, r, ca, cb](Tape& t, const Node& o) {
      if (t.nodes_[a.id].requires_grad) {
        TensorT<T>& g = t.ensure_grad(a);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < ca; ++j) g.data[i * ca + j] += o.grad.data[i * (ca + cb) + j];
      }
      if (t.nodes_[b.id].requires_grad) {
        TensorT<T>& g = t.ensure_grad(b);
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < cb; ++j) g.data[i * cb + j] += o.grad.data[i * (ca + cb) + ca + j];
      }
    });
  }

  Var<T> gather_rows(Var<T> x, std::vector<std::size_t> rows) {
    const TensorT<T>& v = val(x);
    const std::size_t c = v.cols();
    for (std::size_t r : rows) {
      if (r >= v.rows()) throw ContractError("gather_rows: row index out of range");
    }
    TensorT<T> out({rows.size(), c});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(v.data.begin() + rows[i] * c, v.data.begin() + (rows[i] + 1) * c,
                out.data.begin() + i * c);
    }
    return push_op(std::move(out), {x},
                   [x, rows = std::move(rows), c](Tape& t, const Node& o) {
                     TensorT<T>& g = t.ensure_grad(x);
                     for (std::size_t i = 0; i < rows.size(); ++i)
                       for (std::size_t j = 0; j < c; ++j)
                         g.data[rows[i] * c + j] += o.grad.data[i * c + j];
                   });
  }

  // -------------------------------------------------------------------------
  // Linear algebra
  // -------------------------------------------------------------------------

  Var<T> matmul(Var<T> a, Var<T> b) {
    TensorT<T> out = hoi::matmul(val(a), val(b));
    return push_op(std::move(out), {a, b}, [a, b](Tape& t, const Node& o) {
      const TensorT<T>& va = t.val(a);
      const TensorT<T>& vb = t.val(b);
      const std::size_t m = va.shape[0], k = va.shape[1], n = vb.shape[1];
      if (t.nodes_[a.id].requires_grad) {
        TensorT<T> da({m, k});
        matmul_nt_raw(o.grad.data.data(), vb.data.data(), da.data.data(), m, n, k);
        t.accumulate(a, da.data.data(), da.size());
      }
      if (t.nodes_[b.id].requires_grad) {
        TensorT<T> db({k, n});
        matmul_tn_raw(va.data.data(), o.grad.data.data(), db.data.data(), k, m, n);
        t.accumulate(b, db.data.data(), db.size());
      }
    });
  }

  // y = x * w + bias (bias broadcast over rows).
  Var<T> linear(Var<T> x, Var<T> w, Var<T> bias) {
    const TensorT<T>& vx = val(x);
    const TensorT<T>& vw = val(w);
    const TensorT<T>& vb = val(bias);
    if (vx.cols() != vw.rows() || vb.size() != vw.cols()) {
      throw ShapeError("linear: incompatible shapes " + shape_to_string(vx.shape) +
                       ", " + shape_to_string(vw.shape) + ", " + shape_to_string(vb.shape));
    }
    const std::size_t r = vx.rows(), in = vw.rows(), outw = vw.cols();
    TensorT<T> out({r, outw});
    matmul_raw(vx.data.data(), vw.data.data(), out.data.data(), r, in, outw);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < outw; ++j) out.data[i * outw + j] += vb.data[j];
    return push_op(std::move(out), {x, w, bias},
                   [x, w, bias, r, in, outw](Tape& t, const Node& o) {
                     const TensorT<T>& vx = t.val(x);
                     const TensorT<T>& vw = t.val(w);
                     if (t.nodes_[x.id].requires_grad) {
                       TensorT<T> dx({r, in});
                       matmul_nt_raw(o.grad.data.data(), vw.data.data(), dx.data.data(), r, outw, in);
                       t.accumulate(x, dx.data.data(), dx.size());
                     }
                     if (t.nodes_[w.id].requires_grad) {
                       TensorT<T> dw({in, outw});
                       matmul_tn_raw(vx.data.data(), o.grad.data.data(), dw.data.data(), in, r, outw);
                       t.accumulate(w, dw.data.data(), dw.size());
                     }
                     if (t.nodes_[bias.id].requires_grad) {
                       TensorT<T>& gb = t.ensure_grad(bias);
                       for (std::size_t i = 0; i < r; ++i)
                         for (std::size_t j = 0; j < outw; ++j) gb.data[j] += o.grad.data[i * outw + j];
                     }
                   });
  }

  // -------------------------------------------------------------------------
  // Nonlinearities and normalization
  // -------------------------------------------------------------------------

  Var<T> softmax(Var<T> x, int axis = 1) {
    TensorT<T> out = hoi::softmax(val(x), axis);
    return push_op(std::move(out), {x}, [x, axis](Tape& t, const Node& o) {
      const TensorT<T>& y = o.value;
      TensorT<T>& gx = t.ensure_grad(x);
      const std::size_t r = y.rows(), c = y.cols();
      if (axis == 1) {
        for (std::size_t i = 0; i < r; ++i) {
          T dot = T(0);
          for (std::size_t j = 0; j < c; ++j) dot += o.grad.data[i * c + j] * y.data[i * c + j];
          for (std::size_t j = 0; j < c; ++j)
            gx.data[i * c + j] += y.data[i * c + j] * (o.grad.data[i * c + j] - dot);
        }
      } else {
        for (std::size_t j = 0; j < c; ++j) {
          T dot = T(0);
          for (std::size_t i = 0; i < r; ++i) dot += o.grad.data[i * c + j] * y.data[i * c + j];
          for (std::size_t i = 0; i < r; ++i)
            gx.data[i * c + j] += y.data[i * c + j] * (o.grad.data[i * c + j] - dot);
        }
      }
    });
  }

  Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5)) {
    const TensorT<T>& vx = val(x);
    TensorT<T> out = hoi::layer_norm(vx, val(gain), val(bias), eps);
    return push_op(std::move(out), {x, gain, bias},
                   [x, gain, bias, eps](Tape& t, const Node& o) {
                     const TensorT<T>& vx = t.val(x);
                     const TensorT<T>& vg = t.val(gain);
                     const std::size_t r = vx.rows(), n = vx.cols();
                     for (std::size_t i = 0; i < r; ++i) {
                       const T* xr = vx.data.data() + i * n;
                       const T* dy = o.grad.data.data() + i * n;
                       T mean = T(0);
                       for (std::size_t j = 0; j < n; ++j) mean += xr[j];
                       mean /= static_cast<T>(n);
                       T var = T(0);
                       for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
                       var /= static_cast<T>(n);
                       const T inv = T(1) / std::sqrt(var + eps);
                       if (t.nodes_[gain.id].requires_grad) {
                         TensorT<T>& gg = t.ensure_grad(gain);
                         for (std::size_t j = 0; j < n; ++j) gg.data[j] += dy[j] * (xr[j] - mean) * inv;
                       }
                       if (t.nodes_[bias.id].requires_grad) {
                         TensorT<T>& gb = t.ensure_grad(bias);
                         for (std::size_t j = 0; j < n; ++j) gb.data[j] += dy[j];
                       }
                       if (t.nodes_[x.id].requires_grad) {
                         TensorT<T>& gx = t.ensure_grad(x);
                         T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
                         for (std::size_t j = 0; j < n; ++j) {
                           const T xhat = (xr[j] - mean) * inv;
                           const T dxhat = dy[j] * vg.data[j];
                           sum_dxhat += dxhat;
                           sum_dxhat_xhat += dxhat * xhat;
                         }
                         const T invn = T(1) / static_cast<T>(n);
                         for (std::size_t j = 0; j < n; ++j) {
                           const T xhat = (xr[j] - mean) * inv;
                           const T dxhat = dy[j] * vg.data[j];
                           gx.data[i * n + j] +=
                               inv * (dxhat - invn * sum_dxhat - xhat * invn * sum_dxhat_xhat);
                         }
                       }
                     }
                   });
  }

  Var<T> gelu(Var<T> x) {
    const TensorT<T>& vx = val(x);
    TensorT<T> out(vx.shape);
    constexpr T kInvSqrt2 = T(0.70710678118654752440);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const T v = vx.data[i];
      out.data[i] = T(0.5) * v * (T(1) + std::erf(v * kInvSqrt2));
    }
    return push_op(std::move(out), {x}, [x](Tape& t, const Node& o) {
      const TensorT<T>& vx = t.val(x);
      TensorT<T>& gx = t.ensure_grad(x);
      constexpr T kInvSqrt2 = T(0.70710678118654752440);
      constexpr T kInvSqrt2Pi = T(0.39894228040143267794);
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        const T v = vx.data[i];
        const T cdf = T(0.5) * (T(1) + std::erf(v * kInvSqrt2));
        const T pdf = kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
        gx.data[i] += o.grad.data[i] * (cdf + v * pdf);
      }
    });
  }

  Var<T> sigmoid(Var<T> x) {
    const TensorT<T>& vx = val(x);
    TensorT<T> out(vx.shape);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const T v = vx.data[i];
      out.data[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v))
                              : std::exp(v) / (T(1) + std::exp(v));
    }
    return push_op(std::move(out), {x}, [x](Tape& t, const Node& o) {
      TensorT<T>& gx = t.ensure_grad(x);
      for (std::size_t i = 0; i < o.grad.size(); ++i) {
        const T s = o.value.data[i];
        gx.data[i] += o.grad.data[i] * s * (T(1) - s);
      }
    });
  }

  Var<T> sum(Var<T> x) {
    T acc = T(0);
    for (T v : val(x).data) acc += v;
    TensorT<T> out({1}, {acc});
    return push_op(std::move(out), {x}, [x](Tape& t, const Node& o) {
      TensorT<T>& gx = t.ensure_grad(x);
      const T g = o.grad.data[0];
      for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += g;
    });
  }

  Var<T> avg_pool2d(Var<T> x, std::size_t kh, std::size_t kw) {
    TensorT<T> out = hoi::avg_pool2d(val(x), kh, kw);
    return push_op(std::move(out), {x}, [x, kh, kw](Tape& t, const Node& o) {
      TensorT<T>& gx = t.ensure_grad(x);
      const std::size_t oh = o.value.shape[0], ow = o.value.shape[1];
      const std::size_t w = gx.shape[1];
      const T inv = T(1) / static_cast<T>(kh * kw);
      for (std::size_t oi = 0; oi < oh; ++oi)
        for (std::size_t oj = 0; oj < ow; ++oj) {
          const T g = o.grad.data[oi * ow + oj] * inv;
          for (std::size_t a = 0; a < kh; ++a)
            for (std::size_t b = 0; b < kw; ++b)
              gx.data[(oi * kh + a) * w + (oj * kw + b)] += g;
        }
    });
  }

  // Inverted dropout; scales kept activations by 1/(1-p).
  Var<T> dropout(Var<T> x, T p, Prng& prng) {
    if (!(p >= T(0) && p < T(1))) throw ContractError("dropout: p must be in [0,1)");
    if (p == T(0)) return x;
    const TensorT<T>& vx = val(x);
    TensorT<T> mask(vx.shape);
    const T keep = T(1) / (T(1) - p);
    for (std::size_t i = 0; i < mask.size(); ++i)
      mask.data[i] = prng.bernoulli(static_cast<double>(p)) ? T(0) : keep;
    TensorT<T> out(vx.shape);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = vx.data[i] * mask.data[i];
    return push_op(std::move(out), {x}, [x, mask = std::move(mask)](Tape& t, const Node& o) {
      TensorT<T>& gx = t.ensure_grad(x);
      for (std::size_t i = 0; i < o.grad.size(); ++i) gx.data[i] += o.grad.data[i] * mask.data[i];
    });
  }

  // -------------------------------------------------------------------------
  // Fused attention core: softmax(Q Kh^T / sqrt(dh)) Vh per (segment, head).
  // q is (batch*lq) x width, k and v are (batch*lk) x width; segments never
  // attend across each other.
  // -------------------------------------------------------------------------

  Var<T> sdpa(Var<T> q, Var<T> k, Var<T> v, std::size_t heads, std::size_t batch,
              std::size_t lq, std::size_t lk) {
    const TensorT<T>& vq = val(q);
    const TensorT<T>& vk = val(k);
    const TensorT<T>& vv = val(v);
    const std::size_t width = vq.cols();
    if (width % heads != 0) throw ConfigError("sdpa: width not divisible by head count");
    if (vq.rows() != batch * lq || vk.rows() != batch * lk || !vk.same_shape(vv) ||
        vk.cols() != width) {
      throw ShapeError("sdpa: inconsistent operand shapes");
    }
    TensorT<T> out({batch * lq, width});
    TensorT<T> probs({batch * heads, lq * lk});
    sdpa_raw(vq.data.data(), vk.data.data(), vv.data.data(), out.data.data(),
             probs.data.data(), batch, lq, lk, width, heads);
    return push_op(
        std::move(out), {q, k, v},
        [q, k, v, heads, batch, lq, lk, width, probs = std::move(probs)](Tape& t, const Node& o) {
          const std::size_t hd = width / heads;
          const T scl = T(1) / std::sqrt(static_cast<T>(hd));
          const TensorT<T>& vq = t.val(q);
          const TensorT<T>& vk = t.val(k);
          const TensorT<T>& vv = t.val(v);
          TensorT<T>& gq = t.ensure_grad(q);
          TensorT<T>& gk = t.ensure_grad(k);
          TensorT<T>& gv = t.ensure_grad(v);
          std::vector<T> dp(lq * lk), ds(lq * lk);
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t h = 0; h < heads; ++h) {
              const T* P = probs.data.data() + (b * heads + h) * lq * lk;
              const std::size_t off = h * hd;
              const std::size_t qb = b * lq, kb = b * lk;
              // dV_h += P^T dO_h ; dP = dO_h V_h^T
              for (std::size_t j = 0; j < lk; ++j)
                for (std::size_t p = 0; p < hd; ++p) {
                  T acc = T(0);
                  for (std::size_t i = 0; i < lq; ++i)
                    acc += P[i * lk + j] * o.grad.data[(qb + i) * width + off + p];
                  gv.data[(kb + j) * width + off + p] += acc;
                }
              for (std::size_t i = 0; i < lq; ++i)
                for (std::size_t j = 0; j < lk; ++j) {
                  T acc = T(0);
                  for (std::size_t p = 0; p < hd; ++p)
                    acc += o.grad.data[(qb + i) * width + off + p] * vv.data[(kb + j) * width + off + p];
                  dp[i * lk + j] = acc;
                }
              // dS = P .* (dP - rowsum(dP .* P))
              for (std::size_t i = 0; i < lq; ++i) {
                T dot = T(0);
                for (std::size_t j = 0; j < lk; ++j) dot += dp[i * lk + j] * P[i * lk + j];
                for (std::size_t j = 0; j < lk; ++j)
                  ds[i * lk + j] = P[i * lk + j] * (dp[i * lk + j] - dot);
              }
              // dQ_h += dS K_h * scale ; dK_h += dS^T Q_h * scale
              for (std::size_t i = 0; i < lq; ++i)
                for (std::size_t p = 0; p < hd; ++p) {
                  T acc = T(0);
                  for (std::size_t j = 0; j < lk; ++j)
                    acc += ds[i * lk + j] * vk.data[(kb + j) * width + off + p];
                  gq.data[(qb + i) * width + off + p] += acc * scl;
                }
              for (std::size_t j = 0; j < lk; ++j)
                for (std::size_t p = 0; p < hd; ++p) {
                  T acc = T(0);
                  for (std::size_t i = 0; i < lq; ++i)
                    acc += ds[i * lk + j] * vq.data[(qb + i) * width + off + p];
                  gk.data[(kb + j) * width + off + p] += acc * scl;
                }
            }
          }
        });
  }

  // -------------------------------------------------------------------------
  // Class-balanced focal loss on probabilities, mean over rows.
  // loss = (1/R) sum_r sum_c w_c [ y (1-p)^g (-ln p) + (1-y) p^g (-ln(1-p)) ]
  // Probabilities are clamped to [1e-7, 1-1e-7] before the logs.
  // -------------------------------------------------------------------------

  Var<T> focal_loss(Var<T> probs, const TensorT<T>& targets,
                    const TensorT<T>& class_weights, T gamma) {
    const TensorT<T>& p = val(probs);
    if (!p.same_shape(targets)) throw ShapeError("focal_loss: probs/targets shape mismatch");
    const std::size_t r = p.rows(), c = p.cols();
    if (class_weights.size() != c) {
      throw ConfigError("focal_loss: class weight count " + std::to_string(class_weights.size()) +
                        " does not match class count " + std::to_string(c));
    }
    constexpr T kEps = T(1e-7);
    T total = T(0);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        T pc = p.data[i * c + j];
        pc = pc < kEps ? kEps : (pc > T(1) - kEps ? T(1) - kEps : pc);
        const T y = targets.data[i * c + j];
        const T w = class_weights.data[j];
        const T pos = std::pow(T(1) - pc, gamma) * (-std::log(pc));
        const T neg = std::pow(pc, gamma) * (-std::log(T(1) - pc));
        total += w * (y * pos + (T(1) - y) * neg);
      }
    }
    total /= static_cast<T>(r);
    TensorT<T> out({1}, {total});
    TensorT<T> tgt = targets;
    TensorT<T> wts = class_weights;
    return push_op(std::move(out), {probs},
                   [probs, tgt = std::move(tgt), wts = std::move(wts), gamma, r, c](Tape& t, const Node& o) {
                     constexpr T kEps = T(1e-7);
                     const TensorT<T>& p = t.val(probs);
                     TensorT<T>& gp = t.ensure_grad(probs);
                     const T g0 = o.grad.data[0] / static_cast<T>(r);
                     for (std::size_t i = 0; i < r; ++i) {
                       for (std::size_t j = 0; j < c; ++j) {
                         const T raw = p.data[i * c + j];
                         if (raw < kEps || raw > T(1) - kEps) continue;  // flat clamp region
                         const T pc = raw;
                         const T y = tgt.data[i * c + j];
                         const T w = wts.data[j];
                         T dpos = T(0), dneg = T(0);
                         if (gamma == T(0)) {
                           dpos = -T(1) / pc;
                           dneg = T(1) / (T(1) - pc);
                         } else {
                           dpos = gamma * std::pow(T(1) - pc, gamma - T(1)) * std::log(pc) -
                                  std::pow(T(1) - pc, gamma) / pc;
                           dneg = -gamma * std::pow(pc, gamma - T(1)) * std::log(T(1) - pc) +
                                  std::pow(pc, gamma) / (T(1) - pc);
                         }
                         gp.data[i * c + j] += g0 * w * (y * dpos + (T(1) - y) * dneg);
                       }
                     }
                   });
  }

  // -------------------------------------------------------------------------
  // Backward pass
  // -------------------------------------------------------------------------

  void backward(Var<T> loss) {
    if (consumed_) throw ContractError("backward: tape already consumed");
    if (!grad_enabled_) throw ContractError("backward: gradients are disabled on this tape");
    const Node& ln = nodes_[loss.id];
    if (!ln.value.is_scalar()) {
      throw ContractError("backward: loss must be scalar, got shape " +
                          shape_to_string(ln.value.shape));
    }
    ensure_grad(loss).data[0] = T(1);
    for (std::int32_t i = loss.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.back && n.grad.size() != 0) n.back(*this, n);
    }
    consumed_ = true;
  }

 private:
  struct Node {
    TensorT<T> value;
    TensorT<T> grad;  // empty until touched
    bool requires_grad = false;
    std::function<void(Tape&, const Node&)> back;
  };

  Var<T> push(TensorT<T> v, bool rg, std::function<void(Tape&, const Node&)> back) {
    Node n;
    n.value = std::move(v);
    n.requires_grad = rg;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var<T>{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  Var<T> push_op(TensorT<T> v, const std::vector<Var<T>>& inputs,
                 std::function<void(Tape&, const Node&)> back) {
    bool rg = false;
    if (grad_enabled_) {
      for (Var<T> in : inputs) rg = rg || nodes_[in.id].requires_grad;
    }
    return push(std::move(v), rg, rg ? std::move(back) : nullptr);
  }

  TensorT<T>& ensure_grad(Var<T> x) {
    Node& n = nodes_[x.id];
    if (n.grad.size() == 0) n.grad = TensorT<T>::zeros(n.value.shape);
    return n.grad;
  }

  void accumulate(Var<T> x, const T* g, std::size_t n) {
    if (!nodes_[x.id].requires_grad) return;
    TensorT<T>& gx = ensure_grad(x);
    for (std::size_t i = 0; i < n; ++i) gx.data[i] += g[i];
  }

  void check_same_shape(const char* op, Var<T> a, Var<T> b) const {
    if (!val(a).same_shape(val(b))) {
      throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(val(a).shape) +
                       " vs " + shape_to_string(val(b).shape));
    }
  }

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
  bool consumed_ = false;
};

using TapeF = Tape<float>;
using TapeD = Tape<double>;

}  // namespace hoi

#endif  // HOI_AUTODIFF_H_
