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
// Per-entity feature extraction: box-driven patch pooling, Fourier corner
// features, temporal context pooling, and the pluggable text embedder.

#ifndef HOI_FEATURES_H_
#define HOI_FEATURES_H_

#include <memory>
#include <string>
#include <vector>

#include "hoi/prng.h"
#include "hoi/tensor.h"
#include "hoi/types.h"

namespace hoi {

// Normalized patch coverage weights for an L x L grid over the unit square.
// weight[l] is the share of the box area falling into patch l = row*L + col;
// the weights sum to 1. The overlap is computed from exact rectangle
// intersections. Throws ContractError for a zero-area box.
std::vector<double> patch_weights(const Box& box, std::size_t grid_l);

// Weighted sum of patch rows: e = sum_l w_l * tokens[l].
template <typename T>
TensorT<T> patch_merge(const std::vector<double>& weights, const TensorT<T>& patch_tokens) {
  if (patch_tokens.ndim() != 2 || weights.size() != patch_tokens.rows()) {
    throw ShapeError("patch_merge: weight count " + std::to_string(weights.size()) +
                     " does not match patch rows " + std::to_string(patch_tokens.rows()));
  }
  const std::size_t d = patch_tokens.cols();
  TensorT<T> out({1, d});
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const T w = static_cast<T>(weights[l]);
    if (w == T(0)) continue;
    const T* row = patch_tokens.data.data() + l * d;
    for (std::size_t j = 0; j < d; ++j) out.data[j] += w * row[j];
  }
  return out;
}

// Fourier corner features: for each corner c in {top-left, bottom-right},
// [sin(2*pi*F c) || cos(2*pi*F c)] with F of shape (d_box/4) x 2; the two
// corner encodings are concatenated into a 1 x d_box row. The projection to
// the box embedding happens in the model, where it is trainable.
template <typename T>
TensorT<T> fourier_features(const Box& box, const TensorT<T>& freqs) {
  if (freqs.ndim() != 2 || freqs.cols() != 2) {
    throw ShapeError("fourier_features: frequency matrix must be nf x 2");
  }
  const std::size_t nf = freqs.rows();
  TensorT<T> out({1, 4 * nf});
  const double corners[2][2] = {{box.x1, box.y1}, {box.x2, box.y2}};
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t f = 0; f < nf; ++f) {
      const T phase = static_cast<T>(kTwoPi) * (freqs.at(f, 0) * static_cast<T>(corners[c][0]) +
                                                freqs.at(f, 1) * static_cast<T>(corners[c][1]));
      out.data[c * 2 * nf + f] = std::sin(phase);
      out.data[c * 2 * nf + nf + f] = std::cos(phase);
    }
  }
  return out;
}

// Element-wise mean of the per-frame global tokens.
template <typename T>
TensorT<T> context_pool(const std::vector<TensorT<T>>& cls_tokens) {
  if (cls_tokens.empty()) throw ContractError("context_pool: no tokens");
  const std::size_t d = cls_tokens[0].size();
  TensorT<T> out({1, d});
  for (const TensorT<T>& t : cls_tokens) {
    if (t.size() != d) throw ShapeError("context_pool: token width mismatch");
    for (std::size_t j = 0; j < d; ++j) out.data[j] += t.data[j];
  }
  const T inv = T(1) / static_cast<T>(cls_tokens.size());
  for (std::size_t j = 0; j < d; ++j) out.data[j] *= inv;
  return out;
}

// Pluggable text embedding provider for object category semantics.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::size_t width() const = 0;
  // Returns a 1 x width row for the category.
  virtual Tensor embed_raw(const std::string& category) const = 0;

  // Validated entry point; wraps provider failures with the category name.
  Tensor embed(const std::string& category) const;
};

// Deterministic stand-in for a real text encoder: hashes the category into
// a seed and emits a unit-norm Gaussian direction.
class HashTextEmbedder : public TextEmbedder {
 public:
  explicit HashTextEmbedder(std::size_t width, std::uint64_t seed = kDefaultSeed)
      : width_(width), seed_(seed) {}
  std::size_t width() const override { return width_; }
  Tensor embed_raw(const std::string& category) const override;

 private:
  std::size_t width_;
  std::uint64_t seed_;
};

}  // namespace hoi

#endif  // HOI_FEATURES_H_
