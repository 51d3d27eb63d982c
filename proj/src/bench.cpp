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

#include "hoi/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "hoi/data.h"

namespace hoi {

bool linear_fit(const std::vector<double>& x, const std::vector<double>& y, double* slope,
                double* intercept, double* r2) {
  if (x.size() != y.size() || x.size() < 2) return false;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0) return false;
  *slope = (n * sxy - sx * sy) / denom;
  *intercept = (sy - *slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fit = *slope * x[i] + *intercept;
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  *r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return true;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median of group means over the repeat timings.
double median_of_means(const std::vector<double>& times) {
  const std::size_t group = std::max<std::size_t>(1, std::min<std::size_t>(5, times.size() / 2));
  std::vector<double> means;
  for (std::size_t i = 0; i < times.size(); i += group) {
    double s = 0;
    std::size_t k = 0;
    for (std::size_t j = i; j < std::min(times.size(), i + group); ++j, ++k) s += times[j];
    means.push_back(s / static_cast<double>(k));
  }
  return median(means);
}

}  // namespace

BenchResult bench(const ModelWeights& weights, const ModelConfig& cfg,
                  const std::vector<std::size_t>& pair_counts, std::size_t repeats,
                  std::size_t warmup, std::uint64_t seed) {
  cfg.validate();
  if (pair_counts.empty() || repeats == 0) {
    throw ContractError("bench: need at least one pair count and one repeat");
  }
  const std::size_t max_pairs = *std::max_element(pair_counts.begin(), pair_counts.end());

  // One clip: a single moving human and max_pairs objects.
  GenConfig gen;
  gen.clips = 1;
  gen.frames = std::max<std::size_t>(cfg.t_obs + 1, 8);
  gen.min_objects = max_pairs;
  gen.max_objects = max_pairs;
  gen.seed = seed;
  const std::vector<ClipRecord> clips = make_synthetic_dataset(gen);
  const ClipRecord& clip = clips[0];
  SyntheticBackbone provider(cfg.grid_l, cfg.d_vis, seed);
  const ClipFeatures features = clip_features_for(clip, provider);
  HashTextEmbedder embedder(cfg.token_width(), seed);
  const std::int64_t ref = clip.frames.back();

  using Clock = std::chrono::steady_clock;
  BenchResult result;
  result.repeats = repeats;
  result.warmup = warmup;
  for (std::size_t count : pair_counts) {
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (std::size_t i = 0; i < count; ++i) pairs.emplace_back(1, static_cast<std::int64_t>(2 + i));
    for (std::size_t i = 0; i < warmup; ++i) {
      (void)model_forward(weights, cfg, features, clip.clip_id, clip.tracks, pairs, ref, embedder);
    }
    std::vector<double> times;
    times.reserve(repeats);
    for (std::size_t i = 0; i < repeats; ++i) {
      const auto t0 = Clock::now();
      (void)model_forward(weights, cfg, features, clip.clip_id, clip.tracks, pairs, ref, embedder);
      const auto t1 = Clock::now();
      times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    BenchPoint pt;
    pt.pairs = count;
    pt.mean_ms = median_of_means(times);
    double var = 0, mean = 0;
    for (double t : times) mean += t;
    mean /= static_cast<double>(times.size());
    for (double t : times) var += (t - mean) * (t - mean);
    pt.std_ms = times.size() > 1 ? std::sqrt(var / static_cast<double>(times.size() - 1)) : 0.0;
    result.points.push_back(pt);
  }

  std::vector<double> xs, ys;
  for (const BenchPoint& p : result.points) {
    xs.push_back(static_cast<double>(p.pairs));
    ys.push_back(p.mean_ms);
  }
  result.has_fit =
      linear_fit(xs, ys, &result.slope_ms_per_pair, &result.intercept_ms, &result.r2);
  return result;
}

void write_bench_result(const std::string& path, const BenchResult& result) {
  nlohmann::json j;
  j["repeats"] = result.repeats;
  j["warmup"] = result.warmup;
  nlohmann::json pts = nlohmann::json::array();
  for (const BenchPoint& p : result.points) {
    pts.push_back({{"pairs", p.pairs}, {"mean_ms", p.mean_ms}, {"std_ms", p.std_ms}});
  }
  j["points"] = pts;
  if (result.has_fit) {
    j["fit"] = {{"slope_ms_per_pair", result.slope_ms_per_pair},
                {"intercept_ms", result.intercept_ms},
                {"r2", result.r2}};
  }
  std::ofstream out(path);
  if (!out) throw ContractError("cannot open bench output file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace hoi
