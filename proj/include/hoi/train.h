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
// Two-stage optimization: the detection stage trains everything except the
// frozen Fourier matrix against the present-time targets; the Hydra stage
// trains only the anticipation heads on a frozen backbone.

#ifndef HOI_TRAIN_H_
#define HOI_TRAIN_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hoi/model.h"
#include "hoi/prng.h"
#include "hoi/tensor.h"
#include "hoi/types.h"

namespace hoi {

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

struct LossConfig {
  double gamma = 0.5;
  double beta = 0.9999;
  std::vector<std::size_t> class_counts;

  void validate() const {
    if (!(beta >= 0 && beta < 1)) throw ConfigError("beta must be in [0,1)");
    if (gamma < 0) throw ConfigError("gamma must be non-negative");
  }
};

// Effective-number class weight: w_c = (1-beta) / (1-beta^n_c), with w_c = 1
// when n_c = 0 or beta = 0.
double class_balance_weight(double beta, std::size_t count);

// One weight per class; throws when the count vector does not match C.
template <typename T>
TensorT<T> class_weights(const LossConfig& cfg, std::size_t num_classes) {
  cfg.validate();
  if (cfg.class_counts.size() != num_classes) {
    throw ConfigError("class count vector size " + std::to_string(cfg.class_counts.size()) +
                      " does not match " + std::to_string(num_classes) + " classes");
  }
  TensorT<T> w({num_classes});
  for (std::size_t c = 0; c < num_classes; ++c) {
    w.data[c] = static_cast<T>(class_balance_weight(cfg.beta, cfg.class_counts[c]));
  }
  return w;
}

// Class-balanced focal loss on probabilities (see Tape::focal_loss for the
// tape-recorded form).
template <typename T>
T class_balanced_focal_loss(Tape<T>& tape, Var<T> probs, const TensorT<T>& targets,
                            const LossConfig& cfg) {
  const TensorT<T> w = class_weights<T>(cfg, tape.val(probs).cols());
  Var<T> loss = tape.focal_loss(probs, targets, w, static_cast<T>(cfg.gamma));
  return tape.val(loss).scalar();
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct OptimizerConfig {
  double peak_lr = 1e-4;
  double initial_lr = 1e-8;
  std::size_t warmup_epochs = 3;
  double decay_factor = 0.1;
  std::size_t epochs = 40;
  double weight_decay = 1e-2;
  std::size_t batch_size = 16;
  double flip_prob = 0.5;
  double oversample_weight = 3.0;
  std::uint64_t seed = kDefaultSeed;

  void validate() const {
    if (warmup_epochs >= epochs) throw ConfigError("warmup_epochs must be below epochs");
    if (peak_lr <= 0 || initial_lr <= 0 || decay_factor <= 0) {
      throw ConfigError("learning rates and decay factor must be positive");
    }
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
  }
};

// Linear warmup from initial_lr to peak_lr, then exponential decay reaching
// peak_lr * decay_factor at the final epoch. Accepts the closed domain
// [0, epochs] so the limiting value is addressable.
double lr_at(std::size_t epoch, const OptimizerConfig& cfg);

struct AdamwState {
  struct Slot {
    Tensor m, v;
    std::size_t step = 0;
  };
  std::map<std::string, Slot> slots;
};

// Decoupled weight decay Adam update; beta1=0.9, beta2=0.999, eps=1e-8.
// Throws on non-finite gradients, naming the parameter.
void adamw_step(const std::string& name, Tensor& param, const Tensor& grad,
                AdamwState& state, double lr, double weight_decay);

// ---------------------------------------------------------------------------
// Samples and batches
// ---------------------------------------------------------------------------

struct TrainSample {
  std::string clip_id;
  std::int64_t ref_frame = 0;
  std::int64_t human_id = 0;
  std::int64_t object_id = 0;
  std::string category;
  std::vector<WindowFrame> frames;             // t_obs window, oldest first
  std::map<int, std::vector<float>> targets;   // horizon -> multi-hot
  bool change_flag = false;
};

// Weighted draw with replacement: changed samples carry the oversample
// weight; each drawn sample is horizontally flipped with flip_prob. Flipping
// mirrors the box x-coordinates and the patch-grid columns; flipped feature
// grids are materialized into `storage` (which must outlive the batch).
std::vector<TrainSample> sample_batch(const std::vector<TrainSample>& dataset,
                                      const OptimizerConfig& cfg, std::size_t grid_l,
                                      Prng& prng,
                                      std::vector<std::unique_ptr<FrameFeatures>>& storage);

FrameFeatures flip_features(const FrameFeatures& f, std::size_t grid_l);

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

struct EpochStat {
  std::size_t epoch = 0;
  double lr = 0;
  double loss = 0;
  double train_map = 0;  // NaN when not evaluated that epoch
};

struct TrainResult {
  std::vector<EpochStat> curve;
  bool aborted = false;        // loss went non-finite; weights hold the last good state
  double final_train_map = 0;
};

struct TrainSettings {
  OptimizerConfig opt;
  LossConfig loss;
  std::vector<std::string> class_names;
  // Evaluate train-split mAP every `eval_every` epochs (and at the end);
  // stop early once it reaches `target_map` (ignored when <= 0).
  std::size_t eval_every = 5;
  double target_map = 0;
};

// Stage 1: optimizes all parameters except the frozen Fourier matrix
// against the horizon-0 targets.
TrainResult train_detection(ModelWeights& weights, const ModelConfig& cfg,
                            const std::vector<TrainSample>& dataset,
                            const TextEmbedder& embedder, const TrainSettings& settings);

// Stage 2: trains only the tau>0 heads; every other byte of the weights is
// untouched. Samples must carry targets for all configured horizons.
TrainResult train_hydra(ModelWeights& weights, const ModelConfig& cfg,
                        const std::vector<TrainSample>& dataset,
                        const TextEmbedder& embedder, const TrainSettings& settings);

// Oracle-mode mAP of the current weights on the dataset for one horizon.
double train_split_map(const ModelWeights& weights, const ModelConfig& cfg,
                       const std::vector<TrainSample>& dataset,
                       const TextEmbedder& embedder, int horizon,
                       const std::vector<std::string>& class_names);

void write_loss_curve(const std::string& path, const std::vector<EpochStat>& curve);

}  // namespace hoi

#endif  // HOI_TRAIN_H_
