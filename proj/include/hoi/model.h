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
// The pair-interaction model: per-frame human/object tokens are built from
// box-pooled visual features and projected Fourier corner features, stacked
// into temporal windows, refined by cross-attention blenders, and classified
// per anticipation horizon by one linear head each.
//
// Batches are folded into the row dimension: a batch of B windows of length
// L is a (B*L) x width matrix, and attention runs per segment. Every row is
// processed with the same per-element operation order regardless of batch
// size, so batched and sequential evaluation agree bitwise.

#ifndef HOI_MODEL_H_
#define HOI_MODEL_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hoi/autodiff.h"
#include "hoi/features.h"
#include "hoi/prng.h"
#include "hoi/tensor.h"
#include "hoi/types.h"

namespace hoi {

enum class Variant { kDual, kStacked, kSingle };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

struct ModelConfig {
  std::size_t t_obs = 5;     // observed frames per window
  std::size_t grid_l = 16;   // patches per image side
  std::size_t d_vis = 384;   // visual token width
  std::size_t d_box = 384;   // box embedding width
  std::size_t depth = 4;     // blocks per blender
  std::size_t heads = 8;
  double mlp_ratio = 4.0;
  double dropout = 0.1;
  std::vector<int> horizons = {0, 1, 3, 5};
  std::size_t num_classes = 5;
  Variant variant = Variant::kDual;
  double threshold = 0.5;

  std::size_t token_width() const { return d_vis + d_box; }
  std::size_t window_rows() const { return t_obs + 1; }
  // Self-attention width for the stacked variant, cross-attention otherwise.
  std::size_t block_width() const {
    return variant == Variant::kStacked ? 2 * token_width() : token_width();
  }
  // Depths are adjusted per variant to keep the trainable parameter budget
  // aligned: single runs twice the blocks of one blender, stacked halves the
  // depth at double width.
  std::size_t object_block_count() const { return variant == Variant::kDual ? depth : 0; }
  std::size_t human_block_count() const {
    switch (variant) {
      case Variant::kDual: return depth;
      case Variant::kSingle: return 2 * depth;
      case Variant::kStacked: return 0;
    }
    return 0;
  }
  std::size_t stacked_block_count() const {
    return variant == Variant::kStacked ? std::max<std::size_t>(1, depth / 2) : 0;
  }
  std::size_t mlp_hidden() const {
    return static_cast<std::size_t>(std::llround(mlp_ratio * static_cast<double>(block_width())));
  }

  void validate() const;
};

// Enumerates every parameter of a model at this config, in serialization
// order. The callback receives (name, shape, trainable).
void for_each_param_shape(
    const ModelConfig& cfg,
    const std::function<void(const std::string&, const std::vector<std::size_t>&, bool)>& fn);

// Trainable parameter count (the frozen Fourier matrix is excluded).
std::size_t parameter_count(const ModelConfig& cfg);

template <typename T>
struct BlockWeightsT {
  TensorT<T> ln1_g, ln1_b;
  TensorT<T> wq, bq, wk, bk, wv, bv, wo, bo;
  TensorT<T> ln2_g, ln2_b;
  TensorT<T> w1, b1, w2, b2;
};

template <typename T>
struct HeadWeightsT {
  TensorT<T> w, b;
};

template <typename T>
struct ModelWeightsT {
  ModelConfig config;
  TensorT<T> fourier;  // (d_box/4) x 2, frozen after init
  TensorT<T> box_w, box_b;
  TensorT<T> q_token;  // 1 x d_box
  std::vector<BlockWeightsT<T>> object_blocks;
  std::vector<BlockWeightsT<T>> human_blocks;
  std::vector<BlockWeightsT<T>> stacked_blocks;
  TensorT<T> stacked_w, stacked_b;  // 2D -> D output projection, stacked only
  std::map<int, HeadWeightsT<T>> heads;

  static ModelWeightsT init(const ModelConfig& cfg, std::uint64_t seed = kDefaultSeed);

  // Visits every parameter in the same order as for_each_param_shape.
  void visit(const std::function<void(const std::string&, TensorT<T>&, bool)>& fn);
  void visit(const std::function<void(const std::string&, const TensorT<T>&, bool)>& fn) const;

  template <typename U>
  ModelWeightsT<U> cast() const {
    ModelWeightsT<U> out;
    out.config = config;
    auto conv = [](const TensorT<T>& t) { return t.template cast<U>(); };
    out.fourier = conv(fourier);
    out.box_w = conv(box_w);
    out.box_b = conv(box_b);
    out.q_token = conv(q_token);
    auto conv_block = [&](const BlockWeightsT<T>& b) {
      BlockWeightsT<U> o;
      o.ln1_g = conv(b.ln1_g); o.ln1_b = conv(b.ln1_b);
      o.wq = conv(b.wq); o.bq = conv(b.bq);
      o.wk = conv(b.wk); o.bk = conv(b.bk);
      o.wv = conv(b.wv); o.bv = conv(b.bv);
      o.wo = conv(b.wo); o.bo = conv(b.bo);
      o.ln2_g = conv(b.ln2_g); o.ln2_b = conv(b.ln2_b);
      o.w1 = conv(b.w1); o.b1 = conv(b.b1);
      o.w2 = conv(b.w2); o.b2 = conv(b.b2);
      return o;
    };
    for (const auto& b : object_blocks) out.object_blocks.push_back(conv_block(b));
    for (const auto& b : human_blocks) out.human_blocks.push_back(conv_block(b));
    for (const auto& b : stacked_blocks) out.stacked_blocks.push_back(conv_block(b));
    out.stacked_w = conv(stacked_w);
    out.stacked_b = conv(stacked_b);
    for (const auto& [tau, h] : heads) out.heads[tau] = HeadWeightsT<U>{conv(h.w), conv(h.b)};
    return out;
  }
};

using ModelWeights = ModelWeightsT<float>;

// ---------------------------------------------------------------------------
// Per-pair constant inputs, precomputed off-tape.
// ---------------------------------------------------------------------------

struct WindowFrame {
  Box human_box;
  Box object_box;
  const FrameFeatures* features = nullptr;
};

template <typename T>
struct PairInputsT {
  TensorT<T> fourier_h;  // t_obs x d_box
  TensorT<T> fourier_o;
  TensorT<T> visual_h;   // t_obs x d_vis
  TensorT<T> visual_o;
  TensorT<T> context;    // 1 x d_vis
  TensorT<T> semantic;   // 1 x token_width
};

template <typename T>
PairInputsT<T> build_pair_inputs(const std::vector<WindowFrame>& frames,
                                 const std::string& category,
                                 const TextEmbedder& embedder,
                                 const TensorT<T>& fourier, const ModelConfig& cfg) {
  if (frames.size() != cfg.t_obs) {
    throw ContractError("build_pair_inputs: expected " + std::to_string(cfg.t_obs) +
                        " frames, got " + std::to_string(frames.size()));
  }
  PairInputsT<T> out;
  out.fourier_h = TensorT<T>({cfg.t_obs, cfg.d_box});
  out.fourier_o = TensorT<T>({cfg.t_obs, cfg.d_box});
  out.visual_h = TensorT<T>({cfg.t_obs, cfg.d_vis});
  out.visual_o = TensorT<T>({cfg.t_obs, cfg.d_vis});
  std::vector<TensorT<T>> cls_tokens;
  cls_tokens.reserve(cfg.t_obs);
  for (std::size_t i = 0; i < cfg.t_obs; ++i) {
    const WindowFrame& f = frames[i];
    if (f.features == nullptr) throw ContractError("build_pair_inputs: missing frame features");
    const TensorT<T> ffh = fourier_features(f.human_box, fourier);
    const TensorT<T> ffo = fourier_features(f.object_box, fourier);
    std::copy(ffh.data.begin(), ffh.data.end(), out.fourier_h.data.begin() + i * cfg.d_box);
    std::copy(ffo.data.begin(), ffo.data.end(), out.fourier_o.data.begin() + i * cfg.d_box);
    const auto wh = patch_weights(f.human_box, cfg.grid_l);
    const auto wo = patch_weights(f.object_box, cfg.grid_l);
    const TensorT<T> tokens = f.features->patch_tokens.cast<T>();
    const TensorT<T> eh = patch_merge(wh, tokens);
    const TensorT<T> eo = patch_merge(wo, tokens);
    std::copy(eh.data.begin(), eh.data.end(), out.visual_h.data.begin() + i * cfg.d_vis);
    std::copy(eo.data.begin(), eo.data.end(), out.visual_o.data.begin() + i * cfg.d_vis);
    cls_tokens.push_back(f.features->cls.cast<T>());
  }
  out.context = context_pool(cls_tokens);
  Tensor sem = embedder.embed(category);
  if (sem.size() != cfg.token_width()) {
    throw ConfigError("semantic embedder width " + std::to_string(sem.size()) +
                      " does not match token width " + std::to_string(cfg.token_width()));
  }
  out.semantic = sem.cast<T>();
  return out;
}

// Standard sinusoidal positional encoding over `positions` rows.
template <typename T>
TensorT<T> sinusoidal_encoding(std::size_t positions, std::size_t width) {
  TensorT<T> pe({positions, width});
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t i = 0; 2 * i < width; ++i) {
      const double freq = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(width));
      const double angle = static_cast<double>(p) * freq;
      pe.at(p, 2 * i) = static_cast<T>(std::sin(angle));
      if (2 * i + 1 < width) pe.at(p, 2 * i + 1) = static_cast<T>(std::cos(angle));
    }
  }
  return pe;
}

// ---------------------------------------------------------------------------
// Weights bound onto a tape (params when trainable, plain inputs otherwise).
// ---------------------------------------------------------------------------

template <typename T>
struct BoundBlock {
  Var<T> ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
};

template <typename T>
struct BoundModel {
  Var<T> box_w, box_b, q_token;
  std::vector<BoundBlock<T>> object_blocks, human_blocks, stacked_blocks;
  Var<T> stacked_w, stacked_b;
  std::map<int, std::pair<Var<T>, Var<T>>> heads;
  std::vector<std::pair<std::string, Var<T>>> named;
};

using TrainableFilter = std::function<bool(const std::string&)>;

inline bool train_all_but_frozen(const std::string& name) { return name != "fourier"; }

// Hydra stage: only anticipation heads receive updates.
inline bool train_hydra_heads_only(const std::string& name) {
  return name.rfind("head_", 0) == 0 && name.find("head_0.") != 0;
}

template <typename T>
BoundModel<T> bind_weights(Tape<T>& tape, const ModelWeightsT<T>& w,
                           const TrainableFilter& trainable) {
  BoundModel<T> bm;
  std::map<std::string, Var<T>> by_name;
  w.visit([&](const std::string& name, const TensorT<T>& t, bool frozen_ok) {
    (void)frozen_ok;
    if (name == "fourier") return;  // consumed off-tape by the feature builder
    Var<T> v = trainable(name) ? tape.param(t) : tape.input(t);
    by_name[name] = v;
    bm.named.emplace_back(name, v);
  });
  auto get = [&](const std::string& n) { return by_name.at(n); };
  bm.box_w = get("box_proj.w");
  bm.box_b = get("box_proj.b");
  bm.q_token = get("q_token");
  auto bind_blocks = [&](const std::string& prefix, std::size_t n, std::vector<BoundBlock<T>>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string p = prefix + "." + std::to_string(i) + ".";
      BoundBlock<T> b;
      b.ln1_g = get(p + "ln1.g"); b.ln1_b = get(p + "ln1.b");
      b.wq = get(p + "attn.wq"); b.bq = get(p + "attn.bq");
      b.wk = get(p + "attn.wk"); b.bk = get(p + "attn.bk");
      b.wv = get(p + "attn.wv"); b.bv = get(p + "attn.bv");
      b.wo = get(p + "attn.wo"); b.bo = get(p + "attn.bo");
      b.ln2_g = get(p + "ln2.g"); b.ln2_b = get(p + "ln2.b");
      b.w1 = get(p + "mlp.w1"); b.b1 = get(p + "mlp.b1");
      b.w2 = get(p + "mlp.w2"); b.b2 = get(p + "mlp.b2");
      out.push_back(b);
    }
  };
  bind_blocks("object", w.config.object_block_count(), bm.object_blocks);
  bind_blocks("human", w.config.human_block_count(), bm.human_blocks);
  bind_blocks("stacked", w.config.stacked_block_count(), bm.stacked_blocks);
  if (w.config.variant == Variant::kStacked) {
    bm.stacked_w = get("stacked_proj.w");
    bm.stacked_b = get("stacked_proj.b");
  }
  for (int tau : w.config.horizons) {
    const std::string h = "head_" + std::to_string(tau);
    bm.heads[tau] = {get(h + ".w"), get(h + ".b")};
  }
  return bm;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

struct ForwardOptions {
  bool training = false;
  Prng* dropout_prng = nullptr;
};

template <typename T>
struct AssembledWindows {
  Var<T> w_h;  // (B * (t_obs+1)) x token_width
  Var<T> w_o;
  std::size_t batch = 0;
};

// Builds both token windows for the whole batch: frame tokens are
// [box_projection || visual] with sinusoidal positions added, then the
// [q || pooled cls] row is prepended on the human side and the semantic
// token on the object side.
template <typename T>
AssembledWindows<T> assemble_windows(Tape<T>& tape, const BoundModel<T>& bm,
                                     const ModelConfig& cfg,
                                     const std::vector<PairInputsT<T>>& pairs) {
  const std::size_t B = pairs.size();
  const std::size_t t = cfg.t_obs;
  const std::size_t db = cfg.d_box, dv = cfg.d_vis;
  TensorT<T> ff_h({B * t, db}), ff_o({B * t, db});
  TensorT<T> vis_h({B * t, dv}), vis_o({B * t, dv});
  TensorT<T> ctx({B, dv});
  TensorT<T> sem({B, cfg.token_width()});
  for (std::size_t b = 0; b < B; ++b) {
    const PairInputsT<T>& p = pairs[b];
    std::copy(p.fourier_h.data.begin(), p.fourier_h.data.end(), ff_h.data.begin() + b * t * db);
    std::copy(p.fourier_o.data.begin(), p.fourier_o.data.end(), ff_o.data.begin() + b * t * db);
    std::copy(p.visual_h.data.begin(), p.visual_h.data.end(), vis_h.data.begin() + b * t * dv);
    std::copy(p.visual_o.data.begin(), p.visual_o.data.end(), vis_o.data.begin() + b * t * dv);
    std::copy(p.context.data.begin(), p.context.data.end(), ctx.data.begin() + b * dv);
    std::copy(p.semantic.data.begin(), p.semantic.data.end(), sem.data.begin() + b * cfg.token_width());
  }
  const TensorT<T> pe = sinusoidal_encoding<T>(t, cfg.token_width());
  TensorT<T> pe_tiled({B * t, cfg.token_width()});
  for (std::size_t b = 0; b < B; ++b)
    std::copy(pe.data.begin(), pe.data.end(), pe_tiled.data.begin() + b * t * cfg.token_width());

  Var<T> vff_h = tape.input(std::move(ff_h));
  Var<T> vff_o = tape.input(std::move(ff_o));
  Var<T> vvis_h = tape.input(std::move(vis_h));
  Var<T> vvis_o = tape.input(std::move(vis_o));
  Var<T> vctx = tape.input(std::move(ctx));
  Var<T> vsem = tape.input(std::move(sem));
  Var<T> vpe = tape.input(std::move(pe_tiled));

  Var<T> bh = tape.linear(vff_h, bm.box_w, bm.box_b);
  Var<T> bo = tape.linear(vff_o, bm.box_w, bm.box_b);
  Var<T> frames_h = tape.add(tape.concat_cols(bh, vvis_h), vpe);
  Var<T> frames_o = tape.add(tape.concat_cols(bo, vvis_o), vpe);

  std::vector<Var<T>> parts_h, parts_o;
  parts_h.reserve(2 * B);
  parts_o.reserve(2 * B);
  std::vector<std::size_t> rows(t);
  for (std::size_t b = 0; b < B; ++b) {
    Var<T> ctx_row = tape.gather_rows(vctx, {b});
    parts_h.push_back(tape.concat_cols(bm.q_token, ctx_row));
    parts_o.push_back(tape.gather_rows(vsem, {b}));
    for (std::size_t i = 0; i < t; ++i) rows[i] = b * t + i;
    parts_h.push_back(tape.gather_rows(frames_h, rows));
    parts_o.push_back(tape.gather_rows(frames_o, rows));
  }
  return AssembledWindows<T>{tape.concat_rows(parts_h), tape.concat_rows(parts_o), B};
}

// Projected multi-head scaled dot-product attention with output projection.
// q_in is (batch*lq) x width, k_in and v_in are (batch*lk) x width.
template <typename T>
Var<T> multi_head_attention(Tape<T>& tape, Var<T> q_in, Var<T> k_in, Var<T> v_in,
                            Var<T> wq, Var<T> bq, Var<T> wk, Var<T> bk, Var<T> wv,
                            Var<T> bv, Var<T> wo, Var<T> bo, std::size_t heads,
                            std::size_t batch, std::size_t lq, std::size_t lk) {
  Var<T> q = tape.linear(q_in, wq, bq);
  Var<T> k = tape.linear(k_in, wk, bk);
  Var<T> v = tape.linear(v_in, wv, bv);
  Var<T> core = tape.sdpa(q, k, v, heads, batch, lq, lk);
  return tape.linear(core, wo, bo);
}

// One pre-norm transformer block with residual connections: the query
// stream is normalized, cross-attention reads the kv stream as given, and
// self-attention reuses the normalized stream for keys and values.
template <typename T>
Var<T> run_block(Tape<T>& tape, const BoundBlock<T>& blk, Var<T> x, Var<T> kv,
                 bool self_attn, const ModelConfig& cfg, std::size_t batch,
                 std::size_t lq, std::size_t lkv, const ForwardOptions& opt) {
  const bool drop = opt.training && cfg.dropout > 0 && opt.dropout_prng != nullptr;
  Var<T> a = tape.layer_norm(x, blk.ln1_g, blk.ln1_b);
  Var<T> kv_in = self_attn ? a : kv;
  Var<T> proj = multi_head_attention(tape, a, kv_in, kv_in, blk.wq, blk.bq, blk.wk, blk.bk,
                                     blk.wv, blk.bv, blk.wo, blk.bo, cfg.heads, batch, lq,
                                     self_attn ? lq : lkv);
  if (drop) proj = tape.dropout(proj, static_cast<T>(cfg.dropout), *opt.dropout_prng);
  x = tape.add(x, proj);
  Var<T> m = tape.layer_norm(x, blk.ln2_g, blk.ln2_b);
  m = tape.linear(m, blk.w1, blk.b1);
  m = tape.gelu(m);
  m = tape.linear(m, blk.w2, blk.b2);
  if (drop) m = tape.dropout(m, static_cast<T>(cfg.dropout), *opt.dropout_prng);
  return tape.add(x, m);
}

template <typename T>
struct ForwardOutput {
  Var<T> final_tokens;          // B x token_width
  std::map<int, Var<T>> logits;  // horizon -> B x C
  std::map<int, Var<T>> probs;
};

template <typename T>
std::map<int, Var<T>> classify_horizons(Tape<T>& tape, const BoundModel<T>& bm,
                                        const ModelConfig& cfg, Var<T> final_tokens,
                                        std::map<int, Var<T>>* logits_out = nullptr) {
  std::map<int, Var<T>> probs;
  for (int tau : cfg.horizons) {
    auto it = bm.heads.find(tau);
    if (it == bm.heads.end()) {
      throw ConfigError("no classification head for horizon " + std::to_string(tau));
    }
    Var<T> logits = tape.linear(final_tokens, it->second.first, it->second.second);
    if (logits_out) (*logits_out)[tau] = logits;
    probs[tau] = tape.sigmoid(logits);
  }
  return probs;
}

template <typename T>
ForwardOutput<T> forward_batch(Tape<T>& tape, const BoundModel<T>& bm,
                               const ModelConfig& cfg,
                               const std::vector<PairInputsT<T>>& pairs,
                               const ForwardOptions& opt = {}) {
  if (pairs.empty()) throw ContractError("forward_batch: empty batch");
  const std::size_t B = pairs.size();
  const std::size_t L = cfg.window_rows();
  AssembledWindows<T> win = assemble_windows(tape, bm, cfg, pairs);

  std::vector<std::size_t> last_rows(B);
  for (std::size_t b = 0; b < B; ++b) last_rows[b] = b * L + (L - 1);

  ForwardOutput<T> out;
  switch (cfg.variant) {
    case Variant::kDual: {
      Var<T> wo = win.w_o;
      for (const auto& blk : bm.object_blocks)
        wo = run_block(tape, blk, wo, win.w_h, false, cfg, B, L, L, opt);
      Var<T> wh = win.w_h;
      for (const auto& blk : bm.human_blocks)
        wh = run_block(tape, blk, wh, wo, false, cfg, B, L, L, opt);
      out.final_tokens = tape.gather_rows(wh, last_rows);
      break;
    }
    case Variant::kSingle: {
      Var<T> wh = win.w_h;
      for (const auto& blk : bm.human_blocks)
        wh = run_block(tape, blk, wh, win.w_o, false, cfg, B, L, L, opt);
      out.final_tokens = tape.gather_rows(wh, last_rows);
      break;
    }
    case Variant::kStacked: {
      Var<T> x = tape.concat_cols(win.w_h, win.w_o);
      for (const auto& blk : bm.stacked_blocks)
        x = run_block(tape, blk, x, x, true, cfg, B, L, L, opt);
      Var<T> last = tape.gather_rows(x, last_rows);
      out.final_tokens = tape.linear(last, bm.stacked_w, bm.stacked_b);
      break;
    }
  }
  out.probs = classify_horizons(tape, bm, cfg, out.final_tokens, &out.logits);
  return out;
}

// ---------------------------------------------------------------------------
// Inference over one clip (float).
// ---------------------------------------------------------------------------

struct ClipFeatures {
  std::map<std::int64_t, FrameFeatures> by_frame;
  // Frames outside the provided range are clamped to the nearest edge.
  const FrameFeatures& at_clamped(std::int64_t frame) const;
};

std::vector<PairPrediction> model_forward(
    const ModelWeights& weights, const ModelConfig& cfg, const ClipFeatures& features,
    const std::string& clip_id, const std::vector<EntityTrack>& tracks,
    const std::vector<std::pair<std::int64_t, std::int64_t>>& pair_ids,
    std::int64_t reference_frame, const TextEmbedder& embedder);

}  // namespace hoi

#endif  // HOI_MODEL_H_
