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

#include "hoi/features.h"

#include <algorithm>
#include <cmath>

namespace hoi {

std::vector<double> patch_weights(const Box& box, std::size_t grid_l) {
  if (grid_l == 0) throw ContractError("patch_weights: grid_l must be positive");
  Box b{std::clamp(box.x1, 0.0, 1.0), std::clamp(box.y1, 0.0, 1.0),
        std::clamp(box.x2, 0.0, 1.0), std::clamp(box.y2, 0.0, 1.0)};
  if (b.area() <= 0.0) {
    throw ContractError("patch_weights: degenerate box with zero area");
  }
  const double cell = 1.0 / static_cast<double>(grid_l);
  std::vector<double> w(grid_l * grid_l, 0.0);
  // Only patches intersecting the box can have weight.
  const auto lo_idx = [&](double v) {
    auto i = static_cast<long>(std::floor(v * grid_l));
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(grid_l) - 1));
  };
  const std::size_t r0 = lo_idx(b.y1), r1 = lo_idx(std::nexttoward(b.y2, 0.0));
  const std::size_t c0 = lo_idx(b.x1), c1 = lo_idx(std::nexttoward(b.x2, 0.0));
  double total = 0.0;
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) {
      const Box patch{c * cell, r * cell, (c + 1) * cell, (r + 1) * cell};
      const double inter = intersection_area(b, patch);
      if (inter > 0) {
        w[r * grid_l + c] = inter;
        total += inter;
      }
    }
  }
  for (double& v : w) v /= total;
  return w;
}

Tensor TextEmbedder::embed(const std::string& category) const {
  if (category.empty()) {
    throw ContractError("semantic embedding: empty category name");
  }
  try {
    Tensor t = embed_raw(category);
    if (t.size() != width()) {
      throw ShapeError("provider returned width " + std::to_string(t.size()));
    }
    return t;
  } catch (const std::exception& e) {
    throw ContractError("semantic embedding failed for category '" + category +
                        "': " + e.what());
  }
}

Tensor HashTextEmbedder::embed_raw(const std::string& category) const {
  Prng prng(mix64(seed_ ^ fnv1a64(category)));
  Tensor t({1, width_});
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < width_; ++i) {
    const double g = prng.gaussian();
    t.data[i] = static_cast<float>(g);
    norm_sq += g * g;
  }
  const float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
  for (float& v : t.data) v *= inv;
  return t;
}

}  // namespace hoi
