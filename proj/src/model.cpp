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

#include "hoi/model.h"

#include <algorithm>

namespace hoi {

Variant variant_from_string(const std::string& s) {
  if (s == "dual") return Variant::kDual;
  if (s == "stacked") return Variant::kStacked;
  if (s == "single") return Variant::kSingle;
  throw ConfigError("unknown model variant '" + s + "' (expected dual, stacked, or single)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kDual: return "dual";
    case Variant::kStacked: return "stacked";
    case Variant::kSingle: return "single";
  }
  return "dual";
}

void ModelConfig::validate() const {
  if (t_obs < 1 || grid_l < 1 || num_classes < 1 || depth < 1) {
    throw ConfigError("t_obs, grid_l, depth, and num_classes must all be at least 1");
  }
  if (horizons.empty() || horizons.front() != 0) {
    throw ConfigError("horizons must start with 0");
  }
  if (!std::is_sorted(horizons.begin(), horizons.end()) ||
      std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end()) {
    throw ConfigError("horizons must be strictly ascending");
  }
  if (heads == 0 || token_width() % heads != 0) {
    throw ConfigError("token width " + std::to_string(token_width()) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  if (d_box % 4 != 0) {
    throw ConfigError("d_box must be divisible by 4 for the corner features");
  }
  if (mlp_ratio <= 0) throw ConfigError("mlp_ratio must be positive");
  if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must be in [0,1)");
  if (threshold <= 0 || threshold >= 1) throw ConfigError("threshold must be in (0,1)");
}

void for_each_param_shape(
    const ModelConfig& cfg,
    const std::function<void(const std::string&, const std::vector<std::size_t>&, bool)>& fn) {
  cfg.validate();
  using Shape = std::vector<std::size_t>;
  fn("fourier", Shape{cfg.d_box / 4, 2}, false);
  fn("box_proj.w", Shape{cfg.d_box, cfg.d_box}, true);
  fn("box_proj.b", Shape{cfg.d_box}, true);
  fn("q_token", Shape{1, cfg.d_box}, true);
  const std::size_t w = cfg.block_width();
  const std::size_t h = cfg.mlp_hidden();
  auto blocks = [&](const std::string& prefix, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string p = prefix + "." + std::to_string(i) + ".";
      fn(p + "ln1.g", Shape{w}, true);
      fn(p + "ln1.b", Shape{w}, true);
      fn(p + "attn.wq", Shape{w, w}, true);
      fn(p + "attn.bq", Shape{w}, true);
      fn(p + "attn.wk", Shape{w, w}, true);
      fn(p + "attn.bk", Shape{w}, true);
      fn(p + "attn.wv", Shape{w, w}, true);
      fn(p + "attn.bv", Shape{w}, true);
      fn(p + "attn.wo", Shape{w, w}, true);
      fn(p + "attn.bo", Shape{w}, true);
      fn(p + "ln2.g", Shape{w}, true);
      fn(p + "ln2.b", Shape{w}, true);
      fn(p + "mlp.w1", Shape{w, h}, true);
      fn(p + "mlp.b1", Shape{h}, true);
      fn(p + "mlp.w2", Shape{h, w}, true);
      fn(p + "mlp.b2", Shape{w}, true);
    }
  };
  blocks("object", cfg.object_block_count());
  blocks("human", cfg.human_block_count());
  blocks("stacked", cfg.stacked_block_count());
  if (cfg.variant == Variant::kStacked) {
    fn("stacked_proj.w", Shape{2 * cfg.token_width(), cfg.token_width()}, true);
    fn("stacked_proj.b", Shape{cfg.token_width()}, true);
  }
  for (int tau : cfg.horizons) {
    const std::string hn = "head_" + std::to_string(tau);
    fn(hn + ".w", Shape{cfg.token_width(), cfg.num_classes}, true);
    fn(hn + ".b", Shape{cfg.num_classes}, true);
  }
}

std::size_t parameter_count(const ModelConfig& cfg) {
  std::size_t n = 0;
  for_each_param_shape(cfg, [&](const std::string&, const std::vector<std::size_t>& s, bool trainable) {
    if (!trainable) return;
    std::size_t e = 1;
    for (std::size_t v : s) e *= v;
    n += e;
  });
  return n;
}

namespace {

template <typename T>
void init_tensor(const std::string& name, TensorT<T>& t, Prng& prng) {
  const bool is_gain = name.size() >= 2 && name.compare(name.size() - 2, 2, ".g") == 0;
  if (name == "fourier") {
    for (auto& v : t.data) v = static_cast<T>(prng.gaussian());
  } else if (is_gain) {
    std::fill(t.data.begin(), t.data.end(), T(1));
  } else if (t.ndim() == 1) {
    // every 1-D parameter that is not a norm gain is a bias
    std::fill(t.data.begin(), t.data.end(), T(0));
  } else {
    for (auto& v : t.data) v = static_cast<T>(prng.truncated_gaussian(0.02));
  }
}

}  // namespace

template <typename T>
ModelWeightsT<T> ModelWeightsT<T>::init(const ModelConfig& cfg, std::uint64_t seed) {
  ModelWeightsT<T> w;
  w.config = cfg;
  w.object_blocks.resize(cfg.object_block_count());
  w.human_blocks.resize(cfg.human_block_count());
  w.stacked_blocks.resize(cfg.stacked_block_count());
  for (int tau : cfg.horizons) w.heads[tau] = HeadWeightsT<T>{};
  Prng prng(seed);
  w.visit([&](const std::string& name, TensorT<T>& t, bool) {
    std::vector<std::size_t> shape;
    for_each_param_shape(cfg, [&](const std::string& n, const std::vector<std::size_t>& s, bool) {
      if (n == name) shape = s;
    });
    t = TensorT<T>(shape);
    init_tensor(name, t, prng);
  });
  return w;
}

template <typename T>
void ModelWeightsT<T>::visit(const std::function<void(const std::string&, TensorT<T>&, bool)>& fn) {
  fn("fourier", fourier, false);
  fn("box_proj.w", box_w, true);
  fn("box_proj.b", box_b, true);
  fn("q_token", q_token, true);
  auto blocks = [&](const std::string& prefix, std::vector<BlockWeightsT<T>>& bs) {
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const std::string p = prefix + "." + std::to_string(i) + ".";
      BlockWeightsT<T>& b = bs[i];
      fn(p + "ln1.g", b.ln1_g, true);
      fn(p + "ln1.b", b.ln1_b, true);
      fn(p + "attn.wq", b.wq, true);
      fn(p + "attn.bq", b.bq, true);
      fn(p + "attn.wk", b.wk, true);
      fn(p + "attn.bk", b.bk, true);
      fn(p + "attn.wv", b.wv, true);
      fn(p + "attn.bv", b.bv, true);
      fn(p + "attn.wo", b.wo, true);
      fn(p + "attn.bo", b.bo, true);
      fn(p + "ln2.g", b.ln2_g, true);
      fn(p + "ln2.b", b.ln2_b, true);
      fn(p + "mlp.w1", b.w1, true);
      fn(p + "mlp.b1", b.b1, true);
      fn(p + "mlp.w2", b.w2, true);
      fn(p + "mlp.b2", b.b2, true);
    }
  };
  blocks("object", object_blocks);
  blocks("human", human_blocks);
  blocks("stacked", stacked_blocks);
  if (config.variant == Variant::kStacked) {
    fn("stacked_proj.w", stacked_w, true);
    fn("stacked_proj.b", stacked_b, true);
  }
  for (auto& [tau, head] : heads) {
    const std::string hn = "head_" + std::to_string(tau);
    fn(hn + ".w", head.w, true);
    fn(hn + ".b", head.b, true);
  }
}

template <typename T>
void ModelWeightsT<T>::visit(
    const std::function<void(const std::string&, const TensorT<T>&, bool)>& fn) const {
  auto& self = const_cast<ModelWeightsT<T>&>(*this);
  self.visit([&](const std::string& n, TensorT<T>& t, bool tr) { fn(n, t, tr); });
}

template struct ModelWeightsT<float>;
template struct ModelWeightsT<double>;

const FrameFeatures& ClipFeatures::at_clamped(std::int64_t frame) const {
  if (by_frame.empty()) throw ContractError("clip has no frame features");
  auto it = by_frame.lower_bound(frame);
  if (it != by_frame.end() && it->first == frame) return it->second;
  if (it == by_frame.begin()) return it->second;
  if (it == by_frame.end()) return std::prev(it)->second;
  return it->second;  // exact frame absent: clamp forward inside the range
}

std::vector<PairPrediction> model_forward(
    const ModelWeights& weights, const ModelConfig& cfg, const ClipFeatures& features,
    const std::string& clip_id, const std::vector<EntityTrack>& tracks,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pair_ids,
    std::int64_t reference_frame, const TextEmbedder& embedder) {
  std::vector<PairPrediction> preds;
  if (pair_ids.empty()) return preds;

  auto find_track = [&](std::int64_t id) -> const EntityTrack& {
    for (const EntityTrack& t : tracks) {
      if (t.track_id == id) return t;
    }
    throw ContractError("pair references missing track id " + std::to_string(id));
  };

  std::vector<PairInputsT<float>> inputs;
  inputs.reserve(pair_ids.size());
  for (const auto& [hid, oid] : pair_ids) {
    const EntityTrack& human = find_track(hid);
    const EntityTrack& object = find_track(oid);
    if (human.kind != EntityKind::kHuman || object.kind != EntityKind::kObject) {
      throw ContractError("pair (" + std::to_string(hid) + "," + std::to_string(oid) +
                          ") must join one human and one object");
    }
    std::vector<WindowFrame> frames(cfg.t_obs);
    for (std::size_t i = 0; i < cfg.t_obs; ++i) {
      const std::int64_t f = reference_frame - static_cast<std::int64_t>(cfg.t_obs - 1 - i);
      auto hb = human.box_nearest(f);
      auto ob = object.box_nearest(f);
      if (!hb || !ob) {
        throw ContractError("incomplete track: no boxes to fill frame " + std::to_string(f) +
                            " for pair (" + std::to_string(hid) + "," + std::to_string(oid) + ")");
      }
      frames[i] = WindowFrame{*hb, *ob, &features.at_clamped(f)};
    }
    inputs.push_back(build_pair_inputs(frames, object.category, embedder, weights.fourier, cfg));
  }

  Tape<float> tape;
  tape.set_grad_enabled(false);
  BoundModel<float> bm = bind_weights(tape, weights, [](const std::string&) { return false; });
  ForwardOutput<float> out = forward_batch(tape, bm, cfg, inputs);

  for (std::size_t b = 0; b < pair_ids.size(); ++b) {
    const auto& [hid, oid] = pair_ids[b];
    const EntityTrack& human = find_track(hid);
    const EntityTrack& object = find_track(oid);
    PairPrediction p;
    p.clip_id = clip_id;
    p.frame = reference_frame;
    p.human_id = hid;
    p.object_id = oid;
    p.category = object.category;
    p.human_box = *human.box_nearest(reference_frame);
    p.object_box = *object.box_nearest(reference_frame);
    for (int tau : cfg.horizons) {
      const Tensor& probs = tape.val(out.probs.at(tau));
      std::vector<float> row(cfg.num_classes);
      for (std::size_t c = 0; c < cfg.num_classes; ++c) row[c] = probs.at(b, c);
      p.probs[tau] = std::move(row);
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

}  // namespace hoi
