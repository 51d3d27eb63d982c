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

#include "hoi/train.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "hoi/eval.h"

namespace hoi {

double class_balance_weight(double beta, std::size_t count) {
  if (count == 0 || beta == 0.0) return 1.0;
  return (1.0 - beta) / (1.0 - std::pow(beta, static_cast<double>(count)));
}

double lr_at(std::size_t epoch, const OptimizerConfig& cfg) {
  cfg.validate();
  if (epoch > cfg.epochs) {
    throw ContractError("lr_at: epoch " + std::to_string(epoch) + " outside [0," +
                        std::to_string(cfg.epochs) + "]");
  }
  if (epoch <= cfg.warmup_epochs) {
    const double t = static_cast<double>(epoch) / static_cast<double>(cfg.warmup_epochs);
    return cfg.initial_lr + (cfg.peak_lr - cfg.initial_lr) * t;
  }
  const double span = static_cast<double>(cfg.epochs - cfg.warmup_epochs);
  const double t = static_cast<double>(epoch - cfg.warmup_epochs) / span;
  return cfg.peak_lr * std::pow(cfg.decay_factor, t);
}

void adamw_step(const std::string& name, Tensor& param, const Tensor& grad,
                AdamwState& state, double lr, double weight_decay) {
  if (!param.same_shape(grad)) {
    throw ShapeError("adamw_step: gradient shape mismatch for '" + name + "'");
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  AdamwState::Slot& slot = state.slots[name];
  if (slot.m.size() == 0) {
    slot.m = Tensor::zeros(param.shape);
    slot.v = Tensor::zeros(param.shape);
  }
  slot.step += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(slot.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(slot.step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = static_cast<double>(grad.data[i]);
    if (!std::isfinite(g)) {
      throw ContractError("adamw_step: non-finite gradient in '" + name + "' at element " +
                          std::to_string(i));
    }
    const double m = kBeta1 * slot.m.data[i] + (1.0 - kBeta1) * g;
    const double v = kBeta2 * slot.v.data[i] + (1.0 - kBeta2) * g * g;
    slot.m.data[i] = static_cast<float>(m);
    slot.v.data[i] = static_cast<float>(v);
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    double p = static_cast<double>(param.data[i]);
    p -= lr * (mhat / (std::sqrt(vhat) + kEps));
    p -= lr * weight_decay * p;
    param.data[i] = static_cast<float>(p);
  }
}

FrameFeatures flip_features(const FrameFeatures& f, std::size_t grid_l) {
  FrameFeatures out;
  out.frame_index = f.frame_index;
  out.cls = f.cls;
  out.patch_tokens = f.patch_tokens;
  const std::size_t d = f.patch_tokens.cols();
  for (std::size_t r = 0; r < grid_l; ++r) {
    for (std::size_t c = 0; c < grid_l; ++c) {
      const std::size_t src = r * grid_l + c;
      const std::size_t dst = r * grid_l + (grid_l - 1 - c);
      std::copy(f.patch_tokens.data.begin() + src * d, f.patch_tokens.data.begin() + (src + 1) * d,
                out.patch_tokens.data.begin() + dst * d);
    }
  }
  return out;
}

std::vector<TrainSample> sample_batch(const std::vector<TrainSample>& dataset,
                                      const OptimizerConfig& cfg, std::size_t grid_l,
                                      Prng& prng,
                                      std::vector<std::unique_ptr<FrameFeatures>>& storage) {
  if (dataset.empty()) throw ContractError("sample_batch: empty dataset");
  std::vector<double> cumulative(dataset.size());
  double acc = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    acc += dataset[i].change_flag ? cfg.oversample_weight : 1.0;
    cumulative[i] = acc;
  }
  std::vector<TrainSample> batch;
  batch.reserve(cfg.batch_size);
  for (std::size_t b = 0; b < cfg.batch_size; ++b) {
    const double r = prng.uniform() * acc;
    const std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    TrainSample s = dataset[std::min(idx, dataset.size() - 1)];
    if (prng.bernoulli(cfg.flip_prob)) {
      for (WindowFrame& fr : s.frames) {
        fr.human_box = fr.human_box.flipped_horizontal();
        fr.object_box = fr.object_box.flipped_horizontal();
        storage.push_back(std::make_unique<FrameFeatures>(flip_features(*fr.features, grid_l)));
        fr.features = storage.back().get();
      }
    }
    batch.push_back(std::move(s));
  }
  return batch;
}

namespace {

std::map<std::string, Tensor*> name_index(ModelWeights& w) {
  std::map<std::string, Tensor*> idx;
  w.visit([&](const std::string& n, Tensor& t, bool) { idx[n] = &t; });
  return idx;
}

TrainResult run_training(ModelWeights& weights, const ModelConfig& cfg,
                         const std::vector<TrainSample>& dataset,
                         const TextEmbedder& embedder, const TrainSettings& settings,
                         const TrainableFilter& trainable, const std::vector<int>& loss_horizons,
                         int eval_horizon) {
  settings.opt.validate();
  settings.loss.validate();
  if (dataset.empty()) throw ContractError("training: empty dataset");
  for (const TrainSample& s : dataset) {
    for (int tau : loss_horizons) {
      if (!s.targets.count(tau)) {
        throw ContractError("training sample lacks targets for horizon " + std::to_string(tau));
      }
    }
  }
  const Tensor cw = class_weights<float>(settings.loss, cfg.num_classes);
  Prng prng(settings.opt.seed);
  Prng dropout_prng = prng.fork(0x0D0D);
  AdamwState state;
  TrainResult result;
  ModelWeights last_good = weights;

  const std::size_t batches_per_epoch =
      std::max<std::size_t>(1, dataset.size() / settings.opt.batch_size);

  // The recorded epoch loss is a deterministic full-split measurement taken
  // after the epoch's updates (batch losses are too noisy to log). The
  // unaugmented inputs never change, so they are built once.
  std::vector<PairInputsT<float>> split_inputs;
  split_inputs.reserve(dataset.size());
  for (const TrainSample& s : dataset) {
    split_inputs.push_back(build_pair_inputs(s.frames, s.category, embedder, weights.fourier, cfg));
  }
  std::map<int, Tensor> split_targets;
  for (int tau : loss_horizons) {
    Tensor t({dataset.size(), cfg.num_classes});
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto& y = dataset[i].targets.at(tau);
      for (std::size_t c = 0; c < cfg.num_classes; ++c) t.at(i, c) = y[c];
    }
    split_targets[tau] = std::move(t);
  }
  const auto split_loss = [&]() {
    Tape<float> tape;
    tape.set_grad_enabled(false);
    BoundModel<float> bm = bind_weights(tape, weights, [](const std::string&) { return false; });
    ForwardOutput<float> out = forward_batch(tape, bm, cfg, split_inputs);
    double total = 0;
    for (int tau : loss_horizons) {
      total += tape.val(tape.focal_loss(out.probs.at(tau), split_targets.at(tau), cw,
                                        static_cast<float>(settings.loss.gamma)))
                   .scalar();
    }
    return total;
  };

  for (std::size_t epoch = 0; epoch < settings.opt.epochs; ++epoch) {
    const double lr = lr_at(epoch, settings.opt);
    for (std::size_t bi = 0; bi < batches_per_epoch; ++bi) {
      std::vector<std::unique_ptr<FrameFeatures>> storage;
      const std::vector<TrainSample> batch =
          sample_batch(dataset, settings.opt, cfg.grid_l, prng, storage);

      std::vector<PairInputsT<float>> inputs;
      inputs.reserve(batch.size());
      std::map<int, Tensor> targets;
      for (int tau : loss_horizons) targets[tau] = Tensor({batch.size(), cfg.num_classes});
      for (std::size_t b = 0; b < batch.size(); ++b) {
        inputs.push_back(
            build_pair_inputs(batch[b].frames, batch[b].category, embedder, weights.fourier, cfg));
        for (int tau : loss_horizons) {
          const auto& y = batch[b].targets.at(tau);
          for (std::size_t c = 0; c < cfg.num_classes; ++c) targets[tau].at(b, c) = y[c];
        }
      }

      Tape<float> tape;
      BoundModel<float> bm = bind_weights(tape, weights, trainable);
      ForwardOptions opt;
      opt.training = true;
      opt.dropout_prng = &dropout_prng;
      ForwardOutput<float> out = forward_batch(tape, bm, cfg, inputs, opt);
      Var<float> loss{};
      for (int tau : loss_horizons) {
        Var<float> l = tape.focal_loss(out.probs.at(tau), targets.at(tau), cw,
                                       static_cast<float>(settings.loss.gamma));
        loss = loss.valid() ? tape.add(loss, l) : l;
      }
      const float loss_value = tape.val(loss).scalar();
      if (!std::isfinite(loss_value)) {
        weights = last_good;
        result.aborted = true;
        return result;
      }
      tape.backward(loss);

      auto idx = name_index(weights);
      for (const auto& [name, var] : bm.named) {
        if (!trainable(name)) continue;
        adamw_step(name, *idx.at(name), tape.grad(var), state, lr, settings.opt.weight_decay);
      }
    }

    EpochStat stat;
    stat.epoch = epoch;
    stat.lr = lr;
    stat.loss = split_loss();
    stat.train_map = std::numeric_limits<double>::quiet_NaN();
    const bool eval_now = ((epoch + 1) % settings.eval_every == 0) ||
                          epoch + 1 == settings.opt.epochs;
    if (eval_now) {
      stat.train_map =
          train_split_map(weights, cfg, dataset, embedder, eval_horizon, settings.class_names);
      result.final_train_map = stat.train_map;
    }
    result.curve.push_back(stat);
    last_good = weights;
    if (eval_now && settings.target_map > 0 && stat.train_map >= settings.target_map) break;
  }
  if (std::isnan(result.final_train_map) || result.curve.empty() ||
      std::isnan(result.curve.back().train_map)) {
    result.final_train_map =
        train_split_map(weights, cfg, dataset, embedder, eval_horizon, settings.class_names);
  }
  return result;
}

}  // namespace

TrainResult train_detection(ModelWeights& weights, const ModelConfig& cfg,
                            const std::vector<TrainSample>& dataset,
                            const TextEmbedder& embedder, const TrainSettings& settings) {
  return run_training(weights, cfg, dataset, embedder, settings, train_all_but_frozen, {0}, 0);
}

TrainResult train_hydra(ModelWeights& weights, const ModelConfig& cfg,
                        const std::vector<TrainSample>& dataset,
                        const TextEmbedder& embedder, const TrainSettings& settings) {
  std::vector<int> future;
  for (int tau : cfg.horizons) {
    if (tau > 0) future.push_back(tau);
  }
  if (future.empty()) {
    throw ConfigError("train_hydra: configuration has no anticipation horizons");
  }
  return run_training(weights, cfg, dataset, embedder, settings, train_hydra_heads_only, future,
                      future.front());
}

double train_split_map(const ModelWeights& weights, const ModelConfig& cfg,
                       const std::vector<TrainSample>& dataset,
                       const TextEmbedder& embedder, int horizon,
                       const std::vector<std::string>& class_names) {
  if (class_names.size() != cfg.num_classes) {
    throw ConfigError("train_split_map: class name list does not match num_classes");
  }
  std::vector<PairInputsT<float>> inputs;
  inputs.reserve(dataset.size());
  for (const TrainSample& s : dataset) {
    inputs.push_back(build_pair_inputs(s.frames, s.category, embedder, weights.fourier, cfg));
  }
  Tape<float> tape;
  tape.set_grad_enabled(false);
  BoundModel<float> bm = bind_weights(tape, weights, [](const std::string&) { return false; });
  ForwardOutput<float> out = forward_batch(tape, bm, cfg, inputs);
  const Tensor& probs = tape.val(out.probs.at(horizon));

  std::vector<Triplet> preds, gts;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const TrainSample& s = dataset[i];
    Triplet base;
    base.key = FrameKey{s.clip_id, s.ref_frame, horizon};
    base.human_box = s.frames.back().human_box;
    base.object_box = s.frames.back().object_box;
    base.human_id = s.human_id;
    base.object_id = s.object_id;
    base.category = s.category;
    const auto& y = s.targets.at(horizon);
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
      Triplet p = base;
      p.interaction = class_names[c];
      p.confidence = probs.at(i, c);
      preds.push_back(p);
      if (y[c] > 0.5f) {
        Triplet g = base;
        g.interaction = class_names[c];
        gts.push_back(g);
      }
    }
  }
  EvalConfig ecfg;
  MeanApResult res = mean_ap(preds, gts, ecfg);
  return res.full.value_or(0.0);
}

void write_loss_curve(const std::string& path, const std::vector<EpochStat>& curve) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot open loss curve file: " + path);
  out << "epoch,lr,loss,train_map\n";
  for (const EpochStat& s : curve) {
    out << s.epoch << "," << s.lr << "," << s.loss << ",";
    if (!std::isnan(s.train_map)) out << s.train_map;
    out << "\n";
  }
}

}  // namespace hoi
