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

#include "hoi/eval.h"

#include <algorithm>
#include <numeric>
#include <set>

namespace hoi {

namespace {

// Stable rank by descending confidence, preserving input order on ties.
std::vector<std::size_t> rank_by_confidence(const std::vector<Triplet>& preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });
  return order;
}

bool labels_match(const Triplet& p, const Triplet& g) {
  return p.interaction == g.interaction && p.category == g.category;
}

}  // namespace

std::vector<MatchOutcome> match_triplets(const std::vector<Triplet>& preds,
                                         const std::vector<Triplet>& gts,
                                         const EvalConfig& cfg) {
  cfg.validate();
  std::vector<MatchOutcome> out;
  out.reserve(preds.size());
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t pi : rank_by_confidence(preds)) {
    const Triplet& p = preds[pi];
    double best = -1.0;
    std::optional<std::size_t> best_gt;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi] || !labels_match(p, gts[gi])) continue;
      const double ih = iou(p.human_box, gts[gi].human_box);
      const double io = iou(p.object_box, gts[gi].object_box);
      if (ih < cfg.iou_threshold || io < cfg.iou_threshold) continue;
      const double score = std::min(ih, io);
      if (score > best) {
        best = score;
        best_gt = gi;
      }
    }
    if (best_gt) taken[*best_gt] = true;
    out.push_back(MatchOutcome{pi, best_gt});
  }
  return out;
}

double average_precision(std::vector<std::pair<double, bool>> hits, std::size_t n_gt) {
  if (n_gt == 0 || hits.empty()) return 0.0;
  std::stable_sort(hits.begin(), hits.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> precision(hits.size()), recall(hits.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].second) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // Monotone precision envelope, integrated over recall steps.
  double ap = 0.0, env = 0.0;
  for (std::size_t i = hits.size(); i-- > 0;) {
    env = std::max(env, precision[i]);
    const double r_lo = i == 0 ? 0.0 : recall[i - 1];
    ap += env * (recall[i] - r_lo);
  }
  return ap;
}

MeanApResult mean_ap(const std::vector<Triplet>& preds, const std::vector<Triplet>& gts,
                     const EvalConfig& cfg) {
  cfg.validate();
  // Group by frame, match, then pool per-class hit lists across frames.
  std::map<FrameKey, std::vector<std::size_t>> pred_by_frame, gt_by_frame;
  for (std::size_t i = 0; i < preds.size(); ++i) pred_by_frame[preds[i].key].push_back(i);
  for (std::size_t i = 0; i < gts.size(); ++i) gt_by_frame[gts[i].key].push_back(i);

  std::map<std::string, std::vector<std::pair<double, bool>>> hits_by_class;
  std::map<std::string, std::size_t> gt_count;
  for (const Triplet& g : gts) gt_count[g.interaction]++;
  for (const Triplet& p : preds) hits_by_class[p.interaction];  // ensure entry

  std::set<FrameKey> keys;
  for (const auto& [k, v] : pred_by_frame) keys.insert(k);
  for (const auto& key : keys) {
    std::vector<Triplet> fp, fg;
    for (std::size_t i : pred_by_frame[key]) fp.push_back(preds[i]);
    auto git = gt_by_frame.find(key);
    if (git != gt_by_frame.end()) {
      for (std::size_t i : git->second) fg.push_back(gts[i]);
    }
    for (const MatchOutcome& m : match_triplets(fp, fg, cfg)) {
      const Triplet& p = fp[m.pred_index];
      hits_by_class[p.interaction].emplace_back(p.confidence, m.gt_index.has_value());
    }
  }

  MeanApResult res;
  std::set<std::string> classes;
  for (const auto& [c, _] : hits_by_class) classes.insert(c);
  for (const auto& [c, _] : gt_count) classes.insert(c);
  double sum_full = 0, sum_nonrare = 0, sum_rare = 0;
  std::size_t n_full = 0, n_nonrare = 0, n_rare = 0;
  for (const std::string& c : classes) {
    const std::size_t ng = gt_count.count(c) ? gt_count.at(c) : 0;
    const auto hit_it = hits_by_class.find(c);
    const bool has_preds = hit_it != hits_by_class.end() && !hit_it->second.empty();
    if (ng == 0 && !has_preds) continue;  // class absent on both sides
    const double ap = average_precision(has_preds ? hit_it->second
                                                  : std::vector<std::pair<double, bool>>{},
                                        ng);
    res.per_class.push_back(ClassAp{c, ap, ng});
    sum_full += ap;
    ++n_full;
    if (ng >= cfg.rare_cutoff) {
      sum_nonrare += ap;
      ++n_nonrare;
    } else {
      sum_rare += ap;
      ++n_rare;
    }
  }
  if (n_full) res.full = sum_full / static_cast<double>(n_full);
  if (n_nonrare) res.nonrare = sum_nonrare / static_cast<double>(n_nonrare);
  if (n_rare) res.rare = sum_rare / static_cast<double>(n_rare);
  res.nonrare_classes = n_nonrare;
  res.rare_classes = n_rare;
  return res;
}

TopkResult person_topk(const std::vector<Triplet>& preds, const std::vector<Triplet>& gts,
                       const EvalConfig& cfg) {
  cfg.validate();
  using Cell = std::pair<FrameKey, std::int64_t>;
  std::map<Cell, std::vector<std::size_t>> pred_cells, gt_cells;
  for (std::size_t i = 0; i < preds.size(); ++i)
    pred_cells[{preds[i].key, preds[i].human_id}].push_back(i);
  for (std::size_t i = 0; i < gts.size(); ++i)
    gt_cells[{gts[i].key, gts[i].human_id}].push_back(i);

  TopkResult res;
  double sum_r = 0, sum_p = 0, sum_a = 0, sum_f = 0;
  for (const auto& [cell, gt_idx] : gt_cells) {
    std::vector<Triplet> cell_gts;
    for (std::size_t i : gt_idx) cell_gts.push_back(gts[i]);
    std::vector<Triplet> cands;
    auto pit = pred_cells.find(cell);
    if (pit != pred_cells.end()) {
      for (std::size_t i : pit->second) cands.push_back(preds[i]);
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Triplet& a, const Triplet& b) { return a.confidence > b.confidence; });
      if (cands.size() > cfg.top_k) cands.resize(cfg.top_k);
    }
    std::size_t hitc = 0;
    for (const MatchOutcome& m : match_triplets(cands, cell_gts, cfg)) {
      if (m.gt_index) ++hitc;
    }
    const double n_gt = static_cast<double>(cell_gts.size());
    const double n_cand = static_cast<double>(cands.size());
    const double h = static_cast<double>(hitc);
    const double recall = h / n_gt;
    const double precision = n_cand > 0 ? h / n_cand : 0.0;
    const double accuracy = h / (n_gt + n_cand - h);
    const double f1 = (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    sum_r += recall;
    sum_p += precision;
    sum_a += accuracy;
    sum_f += f1;
    ++res.cells;
  }
  if (res.cells) {
    const double n = static_cast<double>(res.cells);
    res.recall = sum_r / n;
    res.precision = sum_p / n;
    res.accuracy = sum_a / n;
    res.f1 = sum_f / n;
  }
  return res;
}

EvalReport evaluate(const std::vector<Triplet>& preds, const std::vector<Triplet>& gts,
                    const EvalConfig& cfg) {
  EvalReport r;
  r.map = mean_ap(preds, gts, cfg);
  r.topk = person_topk(preds, gts, cfg);
  r.n_predictions = preds.size();
  r.n_ground_truth = gts.size();
  return r;
}

}  // namespace hoi
