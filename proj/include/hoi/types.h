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

#ifndef HOI_TYPES_H_
#define HOI_TYPES_H_

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hoi/tensor.h"

namespace hoi {

// Axis-aligned box, corners normalized to [0,1].
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  bool valid() const { return x1 < x2 && y1 < y2; }
  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return valid() ? width() * height() : 0.0; }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }

  double center_distance(const Box& o) const {
    const double dx = cx() - o.cx(), dy = cy() - o.cy();
    return std::sqrt(dx * dx + dy * dy);
  }

  Box flipped_horizontal() const { return Box{1.0 - x2, y1, 1.0 - x1, y2}; }
};

inline double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

inline double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

enum class EntityKind { kHuman, kObject };

// A tracked human or object with per-frame boxes (frames may be missing).
struct EntityTrack {
  std::int64_t track_id = 0;
  std::string category;
  EntityKind kind = EntityKind::kObject;
  std::map<std::int64_t, Box> boxes;

  const Box* box_at(std::int64_t frame) const {
    auto it = boxes.find(frame);
    return it == boxes.end() ? nullptr : &it->second;
  }

  // Nearest-neighbor gap fill; earlier frame wins ties.
  std::optional<Box> box_nearest(std::int64_t frame) const {
    if (boxes.empty()) return std::nullopt;
    auto it = boxes.lower_bound(frame);
    if (it != boxes.end() && it->first == frame) return it->second;
    if (it == boxes.begin()) return it->second;
    if (it == boxes.end()) return std::prev(it)->second;
    auto prev = std::prev(it);
    return (frame - prev->first) <= (it->first - frame) ? prev->second : it->second;
  }
};

// Per-frame backbone output: an L^2 x d_vis patch token grid plus the
// global token.
struct FrameFeatures {
  Tensor patch_tokens;
  Tensor cls;
  std::int64_t frame_index = 0;
};

// One scored pair at one reference frame, all configured horizons at once.
struct PairPrediction {
  std::string clip_id;
  std::int64_t frame = 0;
  std::int64_t human_id = 0;
  std::int64_t object_id = 0;
  std::string category;
  Box human_box;
  Box object_box;
  std::map<int, std::vector<float>> probs;  // horizon -> per-class probability
};

}  // namespace hoi

#endif  // HOI_TYPES_H_
