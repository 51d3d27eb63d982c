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
// Latency-versus-pairs benchmark: times the full per-clip forward path
// (window build, blenders, heads) for growing pair counts and fits a line.

#ifndef HOI_BENCH_H_
#define HOI_BENCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "hoi/model.h"

namespace hoi {

struct BenchPoint {
  std::size_t pairs = 0;
  double mean_ms = 0;  // median of repeat-group means
  double std_ms = 0;
};

struct BenchResult {
  std::vector<BenchPoint> points;
  std::size_t repeats = 0;
  std::size_t warmup = 0;
  bool has_fit = false;  // needs at least two distinct pair counts
  double slope_ms_per_pair = 0;
  double intercept_ms = 0;
  double r2 = 0;
};

// Ordinary least squares over (x, y); returns false for fewer than two
// distinct x values.
bool linear_fit(const std::vector<double>& x, const std::vector<double>& y, double* slope,
                double* intercept, double* r2);

BenchResult bench(const ModelWeights& weights, const ModelConfig& cfg,
                  const std::vector<std::size_t>& pair_counts, std::size_t repeats,
                  std::size_t warmup, std::uint64_t seed);

void write_bench_result(const std::string& path, const BenchResult& result);

}  // namespace hoi

#endif  // HOI_BENCH_H_
