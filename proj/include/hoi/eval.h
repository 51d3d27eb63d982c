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
// Triplet scoring: greedy IoU matching, all-point interpolated AP, mAP over
// the Full / Non-Rare / Rare splits, and person-wise top-k metrics.

#ifndef HOI_EVAL_H_
#define HOI_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hoi/types.h"

namespace hoi {

enum class EvalMode { kOracle, kDetection };

struct EvalConfig {
  double iou_threshold = 0.5;
  std::size_t rare_cutoff = 25;
  std::size_t top_k = 5;
  EvalMode mode = EvalMode::kOracle;

  void validate() const {
    if (!(iou_threshold > 0 && iou_threshold <= 1)) {
      throw ConfigError("iou_threshold must be in (0,1]");
    }
    if (top_k < 1) throw ConfigError("top_k must be at least 1");
  }
};

// Key identifying the ground-truth frame a triplet is scored against. For
// anticipation, a prediction made at frame t with horizon tau carries the
// target frame t+tau here.
struct FrameKey {
  std::string clip_id;
  std::int64_t frame = 0;
  int horizon = 0;

  bool operator<(const FrameKey& o) const {
    if (clip_id != o.clip_id) return clip_id < o.clip_id;
    if (frame != o.frame) return frame < o.frame;
    return horizon < o.horizon;
  }
  bool operator==(const FrameKey& o) const {
    return clip_id == o.clip_id && frame == o.frame && horizon == o.horizon;
  }
};

struct Triplet {
  FrameKey key;
  Box human_box;
  std::int64_t human_id = 0;
  Box object_box;
  std::string category;
  std::int64_t object_id = 0;
  std::string interaction;
  double confidence = 1.0;  // ignored on ground truth
};

// Greedy matching within one frame: predictions in descending confidence,
// each taking the unmatched ground truth with the same interaction and
// object category whose boxes both clear the IoU threshold, preferring the
// candidate with the highest min(human IoU, object IoU).
struct MatchOutcome {
  std::size_t pred_index = 0;
  std::optional<std::size_t> gt_index;  // empty for a false positive
};

std::vector<MatchOutcome> match_triplets(const std::vector<Triplet>& preds,
                                         const std::vector<Triplet>& gts,
                                         const EvalConfig& cfg);

// All-point interpolated average precision. `hits` is (confidence, is_tp)
// in any order. AP is 0 when predictions exist without ground truth.
double average_precision(std::vector<std::pair<double, bool>> hits, std::size_t n_gt);

struct ClassAp {
  std::string name;
  double ap = 0;
  std::size_t gt_count = 0;
};

struct MeanApResult {
  std::vector<ClassAp> per_class;
  std::optional<double> full;
  std::optional<double> nonrare;
  std::optional<double> rare;
  std::size_t nonrare_classes = 0;
  std::size_t rare_classes = 0;
};

MeanApResult mean_ap(const std::vector<Triplet>& preds, const std::vector<Triplet>& gts,
                     const EvalConfig& cfg);

struct TopkResult {
  double recall = 0;
  double precision = 0;
  double accuracy = 0;
  double f1 = 0;
  std::size_t cells = 0;  // (frame, human) groups with ground truth
};

TopkResult person_topk(const std::vector<Triplet>& preds, const std::vector<Triplet>& gts,
                       const EvalConfig& cfg);

struct EvalReport {
  MeanApResult map;
  TopkResult topk;
  std::size_t n_predictions = 0;
  std::size_t n_ground_truth = 0;
};

EvalReport evaluate(const std::vector<Triplet>& preds, const std::vector<Triplet>& gts,
                    const EvalConfig& cfg);

}  // namespace hoi

#endif  // HOI_EVAL_H_
