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

#include <doctest.h>

#include <cmath>

#include "hoi/data.h"
#include "hoi/model.h"
#include "test_util.h"

using namespace hoi;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.t_obs = 3;
  cfg.grid_l = 4;
  cfg.d_vis = 8;
  cfg.d_box = 8;
  cfg.depth = 1;
  cfg.heads = 2;
  cfg.mlp_ratio = 2.0;
  cfg.dropout = 0.0;
  cfg.horizons = {0, 1};
  cfg.num_classes = 3;
  return cfg;
}

Box random_box(Prng& prng) {
  const double x1 = prng.uniform(0.0, 0.7);
  const double y1 = prng.uniform(0.0, 0.7);
  return Box{x1, y1, x1 + prng.uniform(0.05, 0.3), y1 + prng.uniform(0.05, 0.3)};
}

std::vector<PairInputsT<float>> make_pairs(const ModelConfig& cfg, const ModelWeights& w,
                                           std::size_t n, std::uint64_t seed) {
  SyntheticBackbone backbone(cfg.grid_l, cfg.d_vis, seed);
  HashTextEmbedder embedder(cfg.token_width(), seed);
  Prng prng(seed);
  std::vector<PairInputsT<float>> out;
  static std::vector<std::unique_ptr<FrameFeatures>> storage;  // keep alive for the test binary
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<WindowFrame> frames(cfg.t_obs);
    for (std::size_t f = 0; f < cfg.t_obs; ++f) {
      storage.push_back(std::make_unique<FrameFeatures>(
          backbone.features("clip" + std::to_string(i), static_cast<std::int64_t>(f))));
      frames[f] = WindowFrame{random_box(prng), random_box(prng), storage.back().get()};
    }
    out.push_back(build_pair_inputs(frames, i % 2 ? "cup" : "bottle", embedder, w.fourier, cfg));
  }
  return out;
}

void zero_projections(ModelWeights& w) {
  auto zero_block = [](BlockWeightsT<float>& b) {
    std::fill(b.wo.data.begin(), b.wo.data.end(), 0.f);
    std::fill(b.bo.data.begin(), b.bo.data.end(), 0.f);
    std::fill(b.w2.data.begin(), b.w2.data.end(), 0.f);
    std::fill(b.b2.data.begin(), b.b2.data.end(), 0.f);
  };
  for (auto& b : w.object_blocks) zero_block(b);
  for (auto& b : w.human_blocks) zero_block(b);
  for (auto& b : w.stacked_blocks) zero_block(b);
}

TrainableFilter nothing() {
  return [](const std::string&) { return false; };
}

}  // namespace

TEST_CASE("config validation rejects malformed settings") {
  ModelConfig cfg = tiny_config();
  cfg.horizons = {1, 3};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.horizons = {0, 3, 1};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.heads = 5;  // 16 % 5 != 0
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.num_classes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(variant_from_string("other"), ConfigError);
}

TEST_CASE("window assembly: shape, prepended rows, minimal window") {
  for (std::size_t t_obs : {1u, 3u, 5u}) {
    ModelConfig cfg = tiny_config();
    cfg.t_obs = t_obs;
    ModelWeights w = ModelWeights::init(cfg, 7);
    auto pairs = make_pairs(cfg, w, 2, 21);
    Tape<float> tape;
    tape.set_grad_enabled(false);
    BoundModel<float> bm = bind_weights(tape, w, nothing());
    AssembledWindows<float> win = assemble_windows(tape, bm, cfg, pairs);
    const Tensor& wh = tape.val(win.w_h);
    const Tensor& wo = tape.val(win.w_o);
    CHECK(wh.rows() == 2 * (t_obs + 1));
    CHECK(wh.cols() == cfg.token_width());
    CHECK(wo.rows() == 2 * (t_obs + 1));
    // Row 0 of each object window equals the semantic token exactly.
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t j = 0; j < cfg.token_width(); ++j) {
        CHECK(wo.at(b * (t_obs + 1), j) == pairs[b].semantic.data[j]);
      }
    }
  }
}

TEST_CASE("window assembly matches a step-by-step hand build on a toy clip") {
  ModelConfig cfg;
  cfg.t_obs = 3;  // three observed frames
  cfg.grid_l = 2;
  cfg.d_vis = 4;
  cfg.d_box = 4;
  cfg.depth = 1;
  cfg.heads = 2;
  cfg.dropout = 0.0;
  cfg.horizons = {0};
  cfg.num_classes = 2;
  ModelWeights w = ModelWeights::init(cfg, 3);
  auto pairs = make_pairs(cfg, w, 1, 99);

  Tape<float> tape;
  tape.set_grad_enabled(false);
  BoundModel<float> bm = bind_weights(tape, w, nothing());
  AssembledWindows<float> win = assemble_windows(tape, bm, cfg, pairs);
  const Tensor& wh = tape.val(win.w_h);

  const Tensor pe = sinusoidal_encoding<float>(cfg.t_obs, cfg.token_width());
  // Row 0: [q || pooled cls].
  for (std::size_t j = 0; j < cfg.d_box; ++j) CHECK(wh.at(0, j) == w.q_token.data[j]);
  for (std::size_t j = 0; j < cfg.d_vis; ++j)
    CHECK(wh.at(0, cfg.d_box + j) == pairs[0].context.data[j]);
  // Frame rows: [fourier-projection || visual] + positions.
  for (std::size_t f = 0; f < cfg.t_obs; ++f) {
    for (std::size_t j = 0; j < cfg.d_box; ++j) {
      double acc = w.box_b.data[j];
      for (std::size_t k = 0; k < cfg.d_box; ++k) {
        acc += static_cast<double>(pairs[0].fourier_h.at(f, k)) * w.box_w.at(k, j);
      }
      const double expected = acc + pe.at(f, j);
      CHECK(wh.at(1 + f, j) == doctest::Approx(expected).epsilon(1e-5));
    }
    for (std::size_t j = 0; j < cfg.d_vis; ++j) {
      const double expected = pairs[0].visual_h.at(f, j) + pe.at(f, cfg.d_box + j);
      CHECK(wh.at(1 + f, cfg.d_box + j) == doctest::Approx(expected).epsilon(1e-5));
    }
  }
}

TEST_CASE("zeroed projections reduce the dual forward to the residual path") {
  ModelConfig cfg = tiny_config();
  ModelWeights w = ModelWeights::init(cfg, 11);
  zero_projections(w);
  auto pairs = make_pairs(cfg, w, 2, 31);

  Tape<float> tape;
  tape.set_grad_enabled(false);
  BoundModel<float> bm = bind_weights(tape, w, nothing());
  AssembledWindows<float> win = assemble_windows(tape, bm, cfg, pairs);
  const Tensor wh_before = tape.val(win.w_h);

  Tape<float> tape2;
  tape2.set_grad_enabled(false);
  BoundModel<float> bm2 = bind_weights(tape2, w, nothing());
  ForwardOutput<float> out = forward_batch(tape2, bm2, cfg, pairs);
  const Tensor& final_tokens = tape2.val(out.final_tokens);
  const std::size_t L = cfg.window_rows();
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t j = 0; j < cfg.token_width(); ++j) {
      CHECK(final_tokens.at(b, j) == wh_before.at(b * L + (L - 1), j));
    }
  }
}

TEST_CASE("permuting frame order changes the output") {
  ModelConfig cfg = tiny_config();
  ModelWeights w = ModelWeights::init(cfg, 13);
  auto pairs = make_pairs(cfg, w, 1, 41);
  auto reversed = pairs;
  // Reverse the frame rows of every per-frame input.
  for (std::size_t f = 0; f < cfg.t_obs; ++f) {
    const std::size_t rf = cfg.t_obs - 1 - f;
    for (std::size_t j = 0; j < cfg.d_box; ++j) {
      reversed[0].fourier_h.at(f, j) = pairs[0].fourier_h.at(rf, j);
      reversed[0].fourier_o.at(f, j) = pairs[0].fourier_o.at(rf, j);
    }
    for (std::size_t j = 0; j < cfg.d_vis; ++j) {
      reversed[0].visual_h.at(f, j) = pairs[0].visual_h.at(rf, j);
      reversed[0].visual_o.at(f, j) = pairs[0].visual_o.at(rf, j);
    }
  }
  Tape<float> t1, t2;
  t1.set_grad_enabled(false);
  t2.set_grad_enabled(false);
  BoundModel<float> b1 = bind_weights(t1, w, nothing());
  BoundModel<float> b2 = bind_weights(t2, w, nothing());
  const Tensor o1 = t1.val(forward_batch(t1, b1, cfg, pairs).final_tokens);
  const Tensor o2 = t2.val(forward_batch(t2, b2, cfg, reversed).final_tokens);
  bool differs = false;
  for (std::size_t i = 0; i < o1.size(); ++i) differs = differs || o1.data[i] != o2.data[i];
  CHECK(differs);
}

TEST_CASE("attention layer degenerate cases") {
  Prng prng(17);
  const std::size_t width = 4, heads = 2, lq = 3;
  Tape<float> tape;
  tape.set_grad_enabled(false);
  auto rnd = [&](std::vector<std::size_t> s) {
    return tape.input(hoi::testing::random_tensor_f(std::move(s), prng, 0.8));
  };
  Var<float> wq = rnd({width, width}), bq = rnd({width});
  Var<float> wk = rnd({width, width}), bk = rnd({width});
  Var<float> wv = rnd({width, width}), bv = rnd({width});
  Var<float> wo = rnd({width, width}), bo = rnd({width});

  // Single key row: the attention weight is exactly 1, so the output is the
  // output-projection of the value projection of that row.
  const Tensor krow = hoi::testing::random_tensor_f({1, width}, prng);
  Var<float> q_in = rnd({lq, width});
  Var<float> k_in = tape.input(krow);
  Var<float> out = multi_head_attention(tape, q_in, k_in, k_in, wq, bq, wk, bk, wv, bv, wo, bo,
                                        heads, 1, lq, 1);
  Var<float> expect = tape.linear(tape.linear(k_in, wv, bv), wo, bo);
  for (std::size_t i = 0; i < lq; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      CHECK(tape.val(out).at(i, j) == doctest::Approx(tape.val(expect).at(0, j)).epsilon(1e-5));
    }
  }

  // All key rows identical: uniform weights average identical values, so
  // every output row equals the single-key result too.
  Tensor same({4, width});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < width; ++j) same.at(i, j) = krow.at(0, j);
  Var<float> k4 = tape.input(same);
  Var<float> out4 = multi_head_attention(tape, q_in, k4, k4, wq, bq, wk, bk, wv, bv, wo, bo,
                                         heads, 1, lq, 4);
  for (std::size_t i = 0; i < lq; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      CHECK(tape.val(out4).at(i, j) == doctest::Approx(tape.val(expect).at(0, j)).epsilon(1e-4));
    }
  }
}

TEST_CASE("attention core matches a hand-computed two-token case") {
  // One head, two tokens, width 2; q = k = v = x.
  const double x00 = 0.6, x01 = -0.2, x10 = 0.1, x11 = 0.9;
  Tape<double> tape;
  tape.set_grad_enabled(false);
  Var<double> x = tape.input(TensorD::from_rows({{x00, x01}, {x10, x11}}));
  Var<double> out = tape.sdpa(x, x, x, 1, 1, 2, 2);

  const double scale = 1.0 / std::sqrt(2.0);
  const double s00 = (x00 * x00 + x01 * x01) * scale;
  const double s01 = (x00 * x10 + x01 * x11) * scale;
  const double s10 = (x10 * x00 + x11 * x01) * scale;
  const double s11 = (x10 * x10 + x11 * x11) * scale;
  const double p00 = std::exp(s00) / (std::exp(s00) + std::exp(s01));
  const double p01 = 1.0 - p00;
  const double p10 = std::exp(s10) / (std::exp(s10) + std::exp(s11));
  const double p11 = 1.0 - p10;
  CHECK(tape.val(out).at(0, 0) == doctest::Approx(p00 * x00 + p01 * x10).epsilon(1e-12));
  CHECK(tape.val(out).at(0, 1) == doctest::Approx(p00 * x01 + p01 * x11).epsilon(1e-12));
  CHECK(tape.val(out).at(1, 0) == doctest::Approx(p10 * x00 + p11 * x10).epsilon(1e-12));
  CHECK(tape.val(out).at(1, 1) == doctest::Approx(p10 * x01 + p11 * x11).epsilon(1e-12));
}

TEST_CASE("variants share the output contract and parameter budget") {
  ModelConfig cfg = tiny_config();
  for (Variant v : {Variant::kDual, Variant::kStacked, Variant::kSingle}) {
    cfg.variant = v;
    ModelWeights w = ModelWeights::init(cfg, 5);
    auto pairs = make_pairs(cfg, w, 2, 55);
    Tape<float> tape;
    tape.set_grad_enabled(false);
    BoundModel<float> bm = bind_weights(tape, w, nothing());
    ForwardOutput<float> out = forward_batch(tape, bm, cfg, pairs);
    CHECK(tape.val(out.final_tokens).rows() == 2);
    CHECK(tape.val(out.final_tokens).cols() == cfg.token_width());
    CHECK(tape.val(out.probs.at(0)).cols() == cfg.num_classes);
  }

  // Parameter budgets stay within 5% of each other at the default config.
  ModelConfig full;  // full-scale defaults
  std::vector<std::size_t> counts;
  for (Variant v : {Variant::kDual, Variant::kStacked, Variant::kSingle}) {
    full.variant = v;
    counts.push_back(parameter_count(full));
  }
  const double mx = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const double mn = static_cast<double>(*std::min_element(counts.begin(), counts.end()));
  CHECK(mx / mn <= 1.05);
  // Full-configuration dual budget stays in its expected band.
  CHECK(counts[0] > 56'000'000);
  CHECK(counts[0] < 58'000'000);
}

TEST_CASE("stacked variant with zeroed projections projects the concatenated last tokens") {
  ModelConfig cfg = tiny_config();
  cfg.variant = Variant::kStacked;
  cfg.depth = 2;  // one stacked block
  ModelWeights w = ModelWeights::init(cfg, 19);
  zero_projections(w);
  auto pairs = make_pairs(cfg, w, 1, 77);

  Tape<float> tape;
  tape.set_grad_enabled(false);
  BoundModel<float> bm = bind_weights(tape, w, nothing());
  AssembledWindows<float> win = assemble_windows(tape, bm, cfg, pairs);
  const Tensor wh = tape.val(win.w_h);
  const Tensor wo = tape.val(win.w_o);

  Tape<float> t2;
  t2.set_grad_enabled(false);
  BoundModel<float> bm2 = bind_weights(t2, w, nothing());
  const Tensor final_tokens = t2.val(forward_batch(t2, bm2, cfg, pairs).final_tokens);

  const std::size_t L = cfg.window_rows(), D = cfg.token_width();
  for (std::size_t j = 0; j < D; ++j) {
    double acc = w.stacked_b.data[j];
    for (std::size_t k = 0; k < D; ++k) acc += static_cast<double>(wh.at(L - 1, k)) * w.stacked_w.at(k, j);
    for (std::size_t k = 0; k < D; ++k)
      acc += static_cast<double>(wo.at(L - 1, k)) * w.stacked_w.at(D + k, j);
    CHECK(final_tokens.at(0, j) == doctest::Approx(acc).epsilon(1e-4));
  }
}

TEST_CASE("classification heads: sigmoid fixed points and horizon contract") {
  ModelConfig cfg = tiny_config();
  cfg.horizons = {0, 1, 3, 5};
  ModelWeights w = ModelWeights::init(cfg, 23);
  // Zero weights and bias -> probability one half everywhere; a bias of
  // ln(3) pushes it to 0.75.
  for (auto& [tau, head] : w.heads) {
    std::fill(head.w.data.begin(), head.w.data.end(), 0.f);
    std::fill(head.b.data.begin(), head.b.data.end(), 0.f);
  }
  w.heads.at(1).b.data[0] = std::log(3.0f);
  auto pairs = make_pairs(cfg, w, 1, 3);
  Tape<float> tape;
  tape.set_grad_enabled(false);
  BoundModel<float> bm = bind_weights(tape, w, nothing());
  ForwardOutput<float> out = forward_batch(tape, bm, cfg, pairs);
  CHECK(out.probs.size() == 4);
  CHECK(tape.val(out.probs.at(0)).at(0, 0) == doctest::Approx(0.5));
  CHECK(tape.val(out.probs.at(1)).at(0, 0) == doctest::Approx(0.75).epsilon(1e-5));
  CHECK(tape.val(out.probs.at(3)).at(0, 2) == doctest::Approx(0.5));

  // A missing head is a configuration error.
  ModelWeights broken = ModelWeights::init(cfg, 23);
  broken.heads.erase(5);
  Tape<float> t2;
  t2.set_grad_enabled(false);
  CHECK_THROWS_AS(bind_weights(t2, broken, nothing()), std::exception);
}

TEST_CASE("batched forward equals sequential evaluation bitwise") {
  ModelConfig cfg = tiny_config();
  for (Variant v : {Variant::kDual, Variant::kStacked, Variant::kSingle}) {
    cfg.variant = v;
    cfg.depth = 2;
    ModelWeights w = ModelWeights::init(cfg, 29);
    auto pairs = make_pairs(cfg, w, 5, 91);
    Tape<float> tape;
    tape.set_grad_enabled(false);
    BoundModel<float> bm = bind_weights(tape, w, nothing());
    ForwardOutput<float> batched = forward_batch(tape, bm, cfg, pairs);
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      Tape<float> ts;
      ts.set_grad_enabled(false);
      BoundModel<float> bs = bind_weights(ts, w, nothing());
      ForwardOutput<float> single = forward_batch(ts, bs, cfg, {pairs[b]});
      for (int tau : cfg.horizons) {
        const Tensor& pb = tape.val(batched.probs.at(tau));
        const Tensor& ps = ts.val(single.probs.at(tau));
        for (std::size_t c = 0; c < cfg.num_classes; ++c) {
          CHECK(pb.at(b, c) == ps.at(0, c));
        }
      }
    }
  }
}

TEST_CASE("hydra heads are independent of each other and of the backbone") {
  ModelConfig cfg = tiny_config();
  cfg.horizons = {0, 1, 3};
  ModelWeights w = ModelWeights::init(cfg, 37);
  auto pairs = make_pairs(cfg, w, 2, 15);

  Tape<float> t1;
  t1.set_grad_enabled(false);
  BoundModel<float> b1 = bind_weights(t1, w, nothing());
  ForwardOutput<float> before = forward_batch(t1, b1, cfg, pairs);
  const Tensor tokens_before = t1.val(before.final_tokens);
  const Tensor p0_before = t1.val(before.probs.at(0));
  const Tensor p1_before = t1.val(before.probs.at(1));
  const Tensor p3_before = t1.val(before.probs.at(3));

  ModelWeights w2 = w;
  for (auto& v : w2.heads.at(1).w.data) v += 0.25f;
  Tape<float> t2;
  t2.set_grad_enabled(false);
  BoundModel<float> b2 = bind_weights(t2, w2, nothing());
  ForwardOutput<float> after = forward_batch(t2, b2, cfg, pairs);

  const Tensor& tokens_after = t2.val(after.final_tokens);
  for (std::size_t i = 0; i < tokens_before.size(); ++i)
    CHECK(tokens_before.data[i] == tokens_after.data[i]);
  const Tensor& p0_after = t2.val(after.probs.at(0));
  for (std::size_t i = 0; i < p0_before.size(); ++i) CHECK(p0_before.data[i] == p0_after.data[i]);
  const Tensor& p3_after = t2.val(after.probs.at(3));
  for (std::size_t i = 0; i < p3_before.size(); ++i) CHECK(p3_before.data[i] == p3_after.data[i]);
  const Tensor& p1_after = t2.val(after.probs.at(1));
  bool changed = false;
  for (std::size_t i = 0; i < p1_before.size(); ++i)
    changed = changed || p1_before.data[i] != p1_after.data[i];
  CHECK(changed);
}

TEST_CASE("model_forward: empty pair list, lookup errors, determinism") {
  ModelConfig cfg = tiny_config();
  ModelWeights w = ModelWeights::init(cfg, 43);
  GenConfig gen;
  gen.clips = 1;
  gen.frames = 6;
  gen.seed = 4;
  const auto clips = make_synthetic_dataset(gen);
  SyntheticBackbone backbone(cfg.grid_l, cfg.d_vis, 4);
  const ClipFeatures features = clip_features_for(clips[0], backbone);
  HashTextEmbedder embedder(cfg.token_width(), 4);

  CHECK(model_forward(w, cfg, features, clips[0].clip_id, clips[0].tracks, {}, 5, embedder)
            .empty());
  CHECK_THROWS_WITH_AS(model_forward(w, cfg, features, clips[0].clip_id, clips[0].tracks,
                                     {{1, 999}}, 5, embedder),
                       doctest::Contains("999"), ContractError);

  const auto preds1 =
      model_forward(w, cfg, features, clips[0].clip_id, clips[0].tracks, {{1, 2}}, 5, embedder);
  const auto preds2 =
      model_forward(w, cfg, features, clips[0].clip_id, clips[0].tracks, {{1, 2}}, 5, embedder);
  REQUIRE(preds1.size() == 1);
  for (int tau : cfg.horizons) {
    for (std::size_t c = 0; c < cfg.num_classes; ++c) {
      CHECK(preds1[0].probs.at(tau)[c] == preds2[0].probs.at(tau)[c]);
    }
  }

  // A track with no boxes at all cannot fill its window.
  auto tracks = clips[0].tracks;
  EntityTrack empty_track;
  empty_track.track_id = 50;
  empty_track.category = "cup";
  empty_track.kind = EntityKind::kObject;
  tracks.push_back(empty_track);
  CHECK_THROWS_AS(
      model_forward(w, cfg, features, clips[0].clip_id, tracks, {{1, 50}}, 5, embedder),
      ContractError);
}

TEST_CASE("weight initialization is deterministic per seed") {
  ModelConfig cfg = tiny_config();
  ModelWeights a = ModelWeights::init(cfg, 1551);
  ModelWeights b = ModelWeights::init(cfg, 1551);
  ModelWeights c = ModelWeights::init(cfg, 1552);
  bool same = true, differ = false;
  a.visit([&](const std::string& name, const Tensor& t, bool) {
    b.visit([&](const std::string& n2, const Tensor& t2, bool) {
      if (n2 != name) return;
      for (std::size_t i = 0; i < t.size(); ++i) same = same && t.data[i] == t2.data[i];
    });
    c.visit([&](const std::string& n2, const Tensor& t2, bool) {
      if (n2 != name) return;
      for (std::size_t i = 0; i < t.size(); ++i) differ = differ || t.data[i] != t2.data[i];
    });
  });
  CHECK(same);
  CHECK(differ);

  // Norm gains start at one, biases at zero, the Fourier matrix is tagged frozen.
  bool fourier_frozen = true;
  a.visit([&](const std::string& name, const Tensor& t, bool trainable) {
    if (name == "fourier") fourier_frozen = !trainable;
    if (name.find("ln1.g") != std::string::npos) {
      for (float v : t.data) CHECK(v == 1.0f);
    }
    if (name.find("attn.bq") != std::string::npos) {
      for (float v : t.data) CHECK(v == 0.0f);
    }
  });
  CHECK(fourier_frozen);
}

TEST_CASE("model_forward rejects pairs that do not join a human and an object") {
  ModelConfig cfg = tiny_config();
  ModelWeights w = ModelWeights::init(cfg, 3);
  GenConfig gen;
  gen.clips = 1;
  gen.frames = 6;
  const auto clips = make_synthetic_dataset(gen);
  SyntheticBackbone backbone(cfg.grid_l, cfg.d_vis, 4);
  const ClipFeatures features = clip_features_for(clips[0], backbone);
  HashTextEmbedder embedder(cfg.token_width(), 4);
  CHECK_THROWS_AS(model_forward(w, cfg, features, clips[0].clip_id, clips[0].tracks, {{2, 2}}, 5,
                                embedder),
                  ContractError);
}
