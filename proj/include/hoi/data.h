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
// Clip records and their line-delimited JSON files, the deterministic
// synthetic feature backbone, the geometry-labeled dataset generator, and
// the prediction/ground-truth triplet assembly used by evaluation.

#ifndef HOI_DATA_H_
#define HOI_DATA_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hoi/eval.h"
#include "hoi/model.h"
#include "hoi/train.h"
#include "hoi/types.h"

namespace hoi {

// Thrown on malformed record files; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ClipRecord {
  struct Label {
    std::int64_t human_id = 0;
    std::int64_t object_id = 0;
    std::int64_t frame = 0;
    std::vector<std::string> interactions;
  };

  std::string clip_id;
  double fps = 1.0;
  std::vector<std::int64_t> frames;
  std::vector<EntityTrack> tracks;
  std::vector<Label> labels;

  const EntityTrack* find_track(std::int64_t id) const;
  // Frame indices strictly increasing; every label must reference existing
  // tracks with boxes at its frame. Throws ContractError otherwise.
  void validate() const;
};

std::vector<ClipRecord> load_clips(const std::string& path);
void save_clips(const std::string& path, const std::vector<ClipRecord>& clips);

// Sorted unique interaction names across all labels.
std::vector<std::string> scan_classes(const std::vector<ClipRecord>& clips);

// ---------------------------------------------------------------------------
// Feature provider
// ---------------------------------------------------------------------------

class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual FrameFeatures features(const std::string& clip_id, std::int64_t frame) const = 0;
};

// Hash-derived stand-in for a real image backbone: every channel is a
// deterministic uniform value in [-1,1]/sqrt(d_vis), independent of
// evaluation order and platform.
class SyntheticBackbone : public FeatureProvider {
 public:
  SyntheticBackbone(std::size_t grid_l, std::size_t d_vis, std::uint64_t seed = kDefaultSeed)
      : grid_l_(grid_l), d_vis_(d_vis), seed_(seed) {}
  FrameFeatures features(const std::string& clip_id, std::int64_t frame) const override;

 private:
  std::size_t grid_l_, d_vis_;
  std::uint64_t seed_;
};

// Cache of provider outputs keyed by (clip, frame); train samples point at
// entries in here, so the store must outlive them.
class FeatureStore {
 public:
  explicit FeatureStore(const FeatureProvider& provider) : provider_(provider) {}
  const FrameFeatures* get(const std::string& clip_id, std::int64_t frame) const;

 private:
  const FeatureProvider& provider_;
  mutable std::map<std::pair<std::string, std::int64_t>, std::unique_ptr<FrameFeatures>> cache_;
};

ClipFeatures clip_features_for(const ClipRecord& clip, const FeatureProvider& provider);

// ---------------------------------------------------------------------------
// Synthetic dataset with geometry-determined labels
// ---------------------------------------------------------------------------

// Interaction vocabulary of the generator, sorted.
const std::vector<std::string>& synthetic_class_names();

// Deterministic label rule: hold (IoU > 0.1), next_to (center distance
// < 0.2), reach (distance in [0.2, 0.3)), near (distance < 0.4), face
// (horizontal center offset < 0.12).
std::vector<std::string> geometry_labels(const Box& human, const Box& object);

struct GenConfig {
  std::size_t clips = 16;
  std::size_t frames = 12;
  std::size_t min_objects = 1;
  std::size_t max_objects = 2;
  // Scales how far entities travel across a clip; small values give slow
  // scenes whose interactions rarely change.
  double motion_scale = 1.0;
  std::uint64_t seed = kDefaultSeed;
};

std::vector<ClipRecord> make_synthetic_dataset(const GenConfig& cfg);

// ---------------------------------------------------------------------------
// Train samples
// ---------------------------------------------------------------------------

// One sample per (reference frame, human-object pair) where both tracks have
// a box at the reference frame. The target for horizon tau is the label set
// at frame t+tau; a horizon entry is omitted when either track lacks a box
// there. With require_all_horizons, samples missing any configured horizon
// are dropped.
std::vector<TrainSample> build_train_samples(const std::vector<ClipRecord>& clips,
                                             const std::vector<std::string>& classes,
                                             const ModelConfig& cfg, const FeatureStore& store,
                                             bool require_all_horizons);

// ---------------------------------------------------------------------------
// Prediction files and triplet assembly
// ---------------------------------------------------------------------------

struct PredictionFile {
  std::vector<std::string> classes;
  double threshold = 0.5;  // multi-label cutoff used for the detected sets
  std::vector<PairPrediction> predictions;
};

void save_predictions(const std::string& path, const PredictionFile& preds);
PredictionFile load_predictions(const std::string& path);

// Ground truth for every horizon: a label instance at frame f yields a
// triplet under key (clip, f, tau) whenever f - tau is a frame of the clip.
std::vector<Triplet> gt_triplets(const std::vector<ClipRecord>& clips,
                                 const std::vector<int>& horizons);

// Prediction triplets, one per (pair, horizon, class). Oracle mode swaps in
// the ground-truth boxes of the same tracks at the target frame (dropping
// pairs absent there); detection mode keeps the boxes carried in the file.
std::vector<Triplet> prediction_triplets(const PredictionFile& preds,
                                         const std::vector<ClipRecord>& clips, EvalMode mode);

void write_eval_report(const std::string& path, const EvalReport& report);

}  // namespace hoi

#endif  // HOI_DATA_H_
