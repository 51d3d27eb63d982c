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

#include "hoi/data.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

namespace hoi {

using nlohmann::json;

const EntityTrack* ClipRecord::find_track(std::int64_t id) const {
  for (const EntityTrack& t : tracks) {
    if (t.track_id == id) return &t;
  }
  return nullptr;
}

void ClipRecord::validate() const {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i] <= frames[i - 1]) {
      throw ContractError("clip " + clip_id + ": frame indices not strictly increasing");
    }
  }
  for (const EntityTrack& t : tracks) {
    for (const auto& [f, b] : t.boxes) {
      if (!b.valid()) {
        throw ContractError("clip " + clip_id + ": track " + std::to_string(t.track_id) +
                            " has an invalid box at frame " + std::to_string(f));
      }
    }
  }
  for (const Label& l : labels) {
    const EntityTrack* h = find_track(l.human_id);
    const EntityTrack* o = find_track(l.object_id);
    if (!h) {
      throw ContractError("clip " + clip_id + ": label references missing track id " +
                          std::to_string(l.human_id));
    }
    if (!o) {
      throw ContractError("clip " + clip_id + ": label references missing track id " +
                          std::to_string(l.object_id));
    }
    if (!h->box_at(l.frame) || !o->box_at(l.frame)) {
      throw ContractError("clip " + clip_id + ": label at frame " + std::to_string(l.frame) +
                          " references tracks without boxes there");
    }
  }
}

namespace {

json box_to_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("box must be [x1,y1,x2,y2]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw std::runtime_error("invalid box corners");
  return b;
}

json clip_to_json(const ClipRecord& c) {
  json j;
  j["clip_id"] = c.clip_id;
  j["fps"] = c.fps;
  j["frames"] = c.frames;
  json tracks = json::array();
  for (const EntityTrack& t : c.tracks) {
    json tj;
    tj["track_id"] = t.track_id;
    tj["category"] = t.category;
    tj["kind"] = t.kind == EntityKind::kHuman ? "human" : "object";
    json boxes = json::object();
    for (const auto& [f, b] : t.boxes) boxes[std::to_string(f)] = box_to_json(b);
    tj["boxes"] = boxes;
    tracks.push_back(tj);
  }
  j["tracks"] = tracks;
  json labels = json::array();
  for (const auto& l : c.labels) {
    labels.push_back({{"human_id", l.human_id},
                      {"object_id", l.object_id},
                      {"frame", l.frame},
                      {"interactions", l.interactions}});
  }
  j["labels"] = labels;
  return j;
}

ClipRecord clip_from_json(const json& j) {
  ClipRecord c;
  c.clip_id = j.at("clip_id").get<std::string>();
  c.fps = j.value("fps", 1.0);
  c.frames = j.at("frames").get<std::vector<std::int64_t>>();
  for (const json& tj : j.at("tracks")) {
    EntityTrack t;
    t.track_id = tj.at("track_id").get<std::int64_t>();
    t.category = tj.at("category").get<std::string>();
    const std::string kind = tj.at("kind").get<std::string>();
    if (kind == "human") {
      t.kind = EntityKind::kHuman;
    } else if (kind == "object") {
      t.kind = EntityKind::kObject;
    } else {
      throw std::runtime_error("unknown track kind '" + kind + "'");
    }
    for (const auto& [key, bj] : tj.at("boxes").items()) {
      t.boxes[std::stoll(key)] = box_from_json(bj);
    }
    c.tracks.push_back(std::move(t));
  }
  for (const json& lj : j.at("labels")) {
    ClipRecord::Label l;
    l.human_id = lj.at("human_id").get<std::int64_t>();
    l.object_id = lj.at("object_id").get<std::int64_t>();
    l.frame = lj.at("frame").get<std::int64_t>();
    l.interactions = lj.at("interactions").get<std::vector<std::string>>();
    c.labels.push_back(std::move(l));
  }
  return c;
}

}  // namespace

std::vector<ClipRecord> load_clips(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open clips file: " + path);
  std::vector<ClipRecord> clips;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError(std::string("malformed JSON record: ") + e.what(), lineno);
    }
    ClipRecord c;
    try {
      c = clip_from_json(j);
      c.validate();
    } catch (const std::exception& e) {
      throw ParseError(e.what(), lineno);
    }
    clips.push_back(std::move(c));
  }
  return clips;
}

void save_clips(const std::string& path, const std::vector<ClipRecord>& clips) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot open clips file for writing: " + path);
  for (const ClipRecord& c : clips) out << clip_to_json(c).dump() << "\n";
}

std::vector<std::string> scan_classes(const std::vector<ClipRecord>& clips) {
  std::set<std::string> names;
  for (const ClipRecord& c : clips) {
    for (const auto& l : c.labels) names.insert(l.interactions.begin(), l.interactions.end());
  }
  return {names.begin(), names.end()};
}

// ---------------------------------------------------------------------------

FrameFeatures SyntheticBackbone::features(const std::string& clip_id, std::int64_t frame) const {
  const std::uint64_t clip_hash = fnv1a64(clip_id);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_vis_));
  FrameFeatures f;
  f.frame_index = frame;
  f.patch_tokens = Tensor({grid_l_ * grid_l_, d_vis_});
  f.cls = Tensor({1, d_vis_});
  const auto u64_frame = static_cast<std::uint64_t>(frame);
  for (std::size_t l = 0; l < grid_l_ * grid_l_; ++l) {
    for (std::size_t ch = 0; ch < d_vis_; ++ch) {
      const std::uint64_t h = hash_coords(seed_, clip_hash, u64_frame, l, ch);
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
      f.patch_tokens.at(l, ch) = static_cast<float>((2.0 * u - 1.0) * scale);
    }
  }
  const std::uint64_t cls_tag = grid_l_ * grid_l_ + 1;
  for (std::size_t ch = 0; ch < d_vis_; ++ch) {
    const std::uint64_t h = hash_coords(seed_, clip_hash, u64_frame, cls_tag, ch);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    f.cls.data[ch] = static_cast<float>((2.0 * u - 1.0) * scale);
  }
  return f;
}

const FrameFeatures* FeatureStore::get(const std::string& clip_id, std::int64_t frame) const {
  const auto key = std::make_pair(clip_id, frame);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, std::make_unique<FrameFeatures>(provider_.features(clip_id, frame)))
             .first;
  }
  return it->second.get();
}

ClipFeatures clip_features_for(const ClipRecord& clip, const FeatureProvider& provider) {
  ClipFeatures f;
  for (std::int64_t frame : clip.frames) {
    f.by_frame.emplace(frame, provider.features(clip.clip_id, frame));
  }
  return f;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& synthetic_class_names() {
  static const std::vector<std::string> kNames = {"face", "hold", "near", "next_to", "reach"};
  return kNames;
}

std::vector<std::string> geometry_labels(const Box& human, const Box& object) {
  std::vector<std::string> out;
  const double d = human.center_distance(object);
  if (std::abs(human.cx() - object.cx()) < 0.12) out.push_back("face");
  if (iou(human, object) > 0.1) out.push_back("hold");
  if (d < 0.4) out.push_back("near");
  if (d < 0.2) out.push_back("next_to");
  if (d >= 0.2 && d < 0.3) out.push_back("reach");
  return out;
}

namespace {

Box make_box(double cx, double cy, double w, double h) {
  const double x1 = std::clamp(cx - w / 2, 0.005, 0.99 - w);
  const double y1 = std::clamp(cy - h / 2, 0.005, 0.99 - h);
  return Box{x1, y1, x1 + w, y1 + h};
}

}  // namespace

std::vector<ClipRecord> make_synthetic_dataset(const GenConfig& cfg) {
  if (cfg.clips == 0 || cfg.frames < 2 || cfg.min_objects == 0 ||
      cfg.max_objects < cfg.min_objects || cfg.motion_scale < 0) {
    throw ContractError("make_synthetic_dataset: bad generator configuration");
  }
  static const char* kCategories[] = {"cup", "bottle", "bowl", "laptop"};
  std::vector<ClipRecord> clips;
  Prng prng(cfg.seed);
  const double s = cfg.motion_scale;
  for (std::size_t ci = 0; ci < cfg.clips; ++ci) {
    ClipRecord clip;
    clip.clip_id = "clip" + std::to_string(ci);
    clip.fps = 1.0;
    for (std::size_t f = 0; f < cfg.frames; ++f) clip.frames.push_back(static_cast<std::int64_t>(f));

    EntityTrack human;
    human.track_id = 1;
    human.category = "person";
    human.kind = EntityKind::kHuman;
    const double hw = 0.22 + 0.06 * prng.uniform();
    const double hh = 0.3 + 0.08 * prng.uniform();
    const double hx1 = prng.uniform(0.2, 0.8), hy1 = prng.uniform(0.25, 0.75);
    const double hx0 = std::clamp(hx1 - s * prng.uniform(-0.5, 0.5), 0.1, 0.9);
    const double hy0 = std::clamp(hy1 - s * prng.uniform(-0.5, 0.5), 0.15, 0.85);

    const std::size_t n_objects =
        cfg.min_objects + prng.uniform_index(cfg.max_objects - cfg.min_objects + 1);
    std::vector<EntityTrack> objects;
    std::vector<std::array<double, 4>> obj_paths;
    for (std::size_t oi = 0; oi < n_objects; ++oi) {
      EntityTrack obj;
      obj.track_id = static_cast<std::int64_t>(2 + oi);
      obj.category = kCategories[(ci + oi) % 4];
      obj.kind = EntityKind::kObject;
      // Anchor most objects near where the human ends up so interactions
      // appear; the rest sit anywhere as negatives. Paths shrink with the
      // motion scale.
      double ox1, oy1;
      if (prng.bernoulli(0.6)) {
        ox1 = std::clamp(hx1 + prng.uniform(-0.18, 0.18), 0.05, 0.95);
        oy1 = std::clamp(hy1 + prng.uniform(-0.18, 0.18), 0.05, 0.95);
      } else {
        ox1 = prng.uniform(0.1, 0.9);
        oy1 = prng.uniform(0.2, 0.8);
      }
      const double ox0 = std::clamp(ox1 - s * prng.uniform(-0.5, 0.5), 0.05, 0.95);
      const double oy0 = std::clamp(oy1 - s * prng.uniform(-0.5, 0.5), 0.05, 0.95);
      obj_paths.push_back({ox0, oy0, ox1, oy1});
      objects.push_back(std::move(obj));
    }

    for (std::size_t f = 0; f < cfg.frames; ++f) {
      const double t = static_cast<double>(f) / static_cast<double>(cfg.frames - 1);
      const Box hb = make_box(hx0 + (hx1 - hx0) * t, hy0 + (hy1 - hy0) * t, hw, hh);
      human.boxes[static_cast<std::int64_t>(f)] = hb;
      for (std::size_t oi = 0; oi < n_objects; ++oi) {
        const auto& p = obj_paths[oi];
        const double ow = 0.08 + 0.06 * ((ci + oi) % 3) / 2.0;
        const Box ob = make_box(p[0] + (p[2] - p[0]) * t, p[1] + (p[3] - p[1]) * t, ow, ow * 1.2);
        objects[oi].boxes[static_cast<std::int64_t>(f)] = ob;
        const auto names = geometry_labels(hb, ob);
        if (!names.empty()) {
          clip.labels.push_back(ClipRecord::Label{1, objects[oi].track_id,
                                                  static_cast<std::int64_t>(f), names});
        }
      }
    }
    clip.tracks.push_back(std::move(human));
    for (auto& o : objects) clip.tracks.push_back(std::move(o));
    clip.validate();
    clips.push_back(std::move(clip));
  }
  return clips;
}

// ---------------------------------------------------------------------------

std::vector<TrainSample> build_train_samples(const std::vector<ClipRecord>& clips,
                                             const std::vector<std::string>& classes,
                                             const ModelConfig& cfg, const FeatureStore& store,
                                             bool require_all_horizons) {
  std::map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = i;
  if (classes.size() != cfg.num_classes) {
    throw ConfigError("class list size " + std::to_string(classes.size()) +
                      " does not match num_classes " + std::to_string(cfg.num_classes));
  }

  std::vector<TrainSample> samples;
  for (const ClipRecord& clip : clips) {
    clip.validate();
    // (human, object, frame) -> multi-hot target
    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<float>> label_map;
    for (const auto& l : clip.labels) {
      auto& y = label_map[{l.human_id, l.object_id, l.frame}];
      if (y.empty()) y.assign(cfg.num_classes, 0.0f);
      for (const std::string& name : l.interactions) {
        auto it = class_index.find(name);
        if (it == class_index.end()) {
          throw ContractError("clip " + clip.clip_id + ": unknown interaction '" + name + "'");
        }
        y[it->second] = 1.0f;
      }
    }
    const std::int64_t last_frame = clip.frames.back();

    for (const EntityTrack& human : clip.tracks) {
      if (human.kind != EntityKind::kHuman) continue;
      for (const EntityTrack& object : clip.tracks) {
        if (object.kind != EntityKind::kObject) continue;
        for (std::int64_t ref : clip.frames) {
          if (!human.box_at(ref) || !object.box_at(ref)) continue;
          TrainSample s;
          s.clip_id = clip.clip_id;
          s.ref_frame = ref;
          s.human_id = human.track_id;
          s.object_id = object.track_id;
          s.category = object.category;
          s.frames.resize(cfg.t_obs);
          bool ok = true;
          for (std::size_t i = 0; i < cfg.t_obs && ok; ++i) {
            const std::int64_t f = ref - static_cast<std::int64_t>(cfg.t_obs - 1 - i);
            auto hb = human.box_nearest(f);
            auto ob = object.box_nearest(f);
            if (!hb || !ob) {
              ok = false;
              break;
            }
            const std::int64_t clamped = std::clamp(f, clip.frames.front(), last_frame);
            s.frames[i] = WindowFrame{*hb, *ob, store.get(clip.clip_id, clamped)};
          }
          if (!ok) continue;
          for (int tau : cfg.horizons) {
            const std::int64_t tf = ref + tau;
            if (tf > last_frame) continue;
            if (!human.box_at(tf) || !object.box_at(tf)) continue;
            auto it = label_map.find({human.track_id, object.track_id, tf});
            s.targets[tau] = it != label_map.end() ? it->second
                                                   : std::vector<float>(cfg.num_classes, 0.0f);
          }
          if (!s.targets.count(0)) continue;
          if (require_all_horizons) {
            bool all = true;
            for (int tau : cfg.horizons) all = all && s.targets.count(tau);
            if (!all) continue;
          }
          const auto& y0 = s.targets.at(0);
          for (const auto& [tau, y] : s.targets) {
            if (tau > 0 && y != y0) s.change_flag = true;
          }
          samples.push_back(std::move(s));
        }
      }
    }
  }
  return samples;
}

// ---------------------------------------------------------------------------

void save_predictions(const std::string& path, const PredictionFile& preds) {
  std::ofstream out(path);
  if (!out) throw ContractError("cannot open predictions file for writing: " + path);
  for (const PairPrediction& p : preds.predictions) {
    json j;
    j["clip_id"] = p.clip_id;
    j["frame"] = p.frame;
    j["human_id"] = p.human_id;
    j["object_id"] = p.object_id;
    j["category"] = p.category;
    j["human_box"] = box_to_json(p.human_box);
    j["object_box"] = box_to_json(p.object_box);
    j["classes"] = preds.classes;
    j["threshold"] = preds.threshold;
    json probs = json::object();
    json detected = json::object();
    for (const auto& [tau, row] : p.probs) {
      probs[std::to_string(tau)] = row;
      std::vector<std::string> names;
      for (std::size_t c = 0; c < row.size() && c < preds.classes.size(); ++c) {
        if (row[c] > preds.threshold) names.push_back(preds.classes[c]);
      }
      detected[std::to_string(tau)] = names;
    }
    j["probs"] = probs;
    j["detected"] = detected;
    out << j.dump() << "\n";
  }
}

PredictionFile load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open predictions file: " + path);
  PredictionFile pf;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      PairPrediction p;
      p.clip_id = j.at("clip_id").get<std::string>();
      p.frame = j.at("frame").get<std::int64_t>();
      p.human_id = j.at("human_id").get<std::int64_t>();
      p.object_id = j.at("object_id").get<std::int64_t>();
      p.category = j.at("category").get<std::string>();
      p.human_box = box_from_json(j.at("human_box"));
      p.object_box = box_from_json(j.at("object_box"));
      const auto classes = j.at("classes").get<std::vector<std::string>>();
      if (pf.classes.empty()) {
        pf.classes = classes;
      } else if (pf.classes != classes) {
        throw std::runtime_error("inconsistent class list across records");
      }
      pf.threshold = j.value("threshold", pf.threshold);
      for (const auto& [key, row] : j.at("probs").items()) {
        p.probs[std::stoi(key)] = row.get<std::vector<float>>();
      }
      pf.predictions.push_back(std::move(p));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return pf;
}

std::vector<Triplet> gt_triplets(const std::vector<ClipRecord>& clips,
                                 const std::vector<int>& horizons) {
  std::vector<Triplet> out;
  for (const ClipRecord& clip : clips) {
    std::set<std::int64_t> frame_set(clip.frames.begin(), clip.frames.end());
    for (const auto& l : clip.labels) {
      const EntityTrack* h = clip.find_track(l.human_id);
      const EntityTrack* o = clip.find_track(l.object_id);
      for (int tau : horizons) {
        if (!frame_set.count(l.frame - tau)) continue;
        for (const std::string& name : l.interactions) {
          Triplet t;
          t.key = FrameKey{clip.clip_id, l.frame, tau};
          t.human_box = *h->box_at(l.frame);
          t.object_box = *o->box_at(l.frame);
          t.human_id = l.human_id;
          t.object_id = l.object_id;
          t.category = o->category;
          t.interaction = name;
          out.push_back(std::move(t));
        }
      }
    }
  }
  return out;
}

std::vector<Triplet> prediction_triplets(const PredictionFile& preds,
                                         const std::vector<ClipRecord>& clips, EvalMode mode) {
  std::map<std::string, const ClipRecord*> by_id;
  for (const ClipRecord& c : clips) by_id[c.clip_id] = &c;
  std::vector<Triplet> out;
  for (const PairPrediction& p : preds.predictions) {
    auto cit = by_id.find(p.clip_id);
    if (cit == by_id.end()) {
      throw ContractError("prediction references unknown clip '" + p.clip_id + "'");
    }
    const ClipRecord& clip = *cit->second;
    for (const auto& [tau, row] : p.probs) {
      const std::int64_t target = p.frame + tau;
      Box hb = p.human_box, ob = p.object_box;
      if (mode == EvalMode::kOracle) {
        const EntityTrack* h = clip.find_track(p.human_id);
        const EntityTrack* o = clip.find_track(p.object_id);
        if (!h || !o) {
          throw ContractError("prediction references unknown track in clip '" + p.clip_id + "'");
        }
        const Box* hbt = h->box_at(target);
        const Box* obt = o->box_at(target);
        if (!hbt || !obt) continue;  // pair absent at the target frame
        hb = *hbt;
        ob = *obt;
      }
      for (std::size_t c = 0; c < row.size() && c < preds.classes.size(); ++c) {
        if (!(row[c] > 0.f)) continue;  // zero probability is "no interaction"
        Triplet t;
        t.key = FrameKey{p.clip_id, target, tau};
        t.human_box = hb;
        t.object_box = ob;
        t.human_id = p.human_id;
        t.object_id = p.object_id;
        t.category = p.category;
        t.interaction = preds.classes[c];
        t.confidence = row[c];
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

void write_eval_report(const std::string& path, const EvalReport& report) {
  json j;
  if (report.map.full) j["map_full"] = *report.map.full;
  if (report.map.nonrare) j["map_nonrare"] = *report.map.nonrare;
  if (report.map.rare) j["map_rare"] = *report.map.rare;
  j["topk_recall"] = report.topk.recall;
  j["topk_precision"] = report.topk.precision;
  j["topk_accuracy"] = report.topk.accuracy;
  j["topk_f1"] = report.topk.f1;
  json per_class = json::array();
  for (const ClassAp& c : report.map.per_class) {
    per_class.push_back({{"name", c.name}, {"ap", c.ap}, {"count", c.gt_count}});
  }
  j["per_class"] = per_class;
  j["nonrare_classes"] = report.map.nonrare_classes;
  j["rare_classes"] = report.map.rare_classes;
  j["n_predictions"] = report.n_predictions;
  j["n_ground_truth"] = report.n_ground_truth;
  std::ofstream out(path);
  if (!out) throw ContractError("cannot open report file for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace hoi
