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
// Times the OpenMP kernels against their serial references and verifies the
// outputs agree bitwise while it is at it.

#include <chrono>
#include <cstdio>
#include <vector>

#include <omp.h>

#include "hoi/kernels.h"
#include "hoi/prng.h"

using namespace hoi;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn, int repeats) {
  fn();  // warmup
  const auto t0 = Clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

Tensor random_matrix(std::size_t r, std::size_t c, Prng& prng) {
  Tensor t({r, c});
  for (auto& v : t.data) v = static_cast<float>(prng.uniform(-1, 1));
  return t;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  Prng prng(1551);

  std::printf("\n%-28s %12s %12s %9s %9s\n", "kernel", "serial ms", "parallel ms", "speedup",
              "bitwise");
  for (std::size_t n : {64u, 128u, 256u, 512u}) {
    const Tensor a = random_matrix(n, n, prng);
    const Tensor b = random_matrix(n, n, prng);
    Tensor c1({n, n}), c2({n, n});
    const double ts = time_ms(
        [&] { matmul_serial_raw(a.data.data(), b.data.data(), c1.data.data(), n, n, n); }, 3);
    const double tp =
        time_ms([&] { matmul_raw(a.data.data(), b.data.data(), c2.data.data(), n, n, n); }, 3);
    bool same = true;
    for (std::size_t i = 0; i < c1.size(); ++i) same = same && c1.data[i] == c2.data[i];
    std::printf("%-22s %4zu %12.3f %12.3f %8.2fx %9s\n", "matmul", n, ts, tp, ts / tp,
                same ? "yes" : "NO");
  }

  for (std::size_t batch : {8u, 32u, 128u}) {
    const std::size_t l = 6, width = 768, heads = 8;
    const Tensor q = random_matrix(batch * l, width, prng);
    const Tensor k = random_matrix(batch * l, width, prng);
    const Tensor v = random_matrix(batch * l, width, prng);
    Tensor o1({batch * l, width}), o2({batch * l, width});
    Tensor p1({batch * heads, l * l}), p2({batch * heads, l * l});
    const double ts = time_ms(
        [&] {
          sdpa_serial_raw(q.data.data(), k.data.data(), v.data.data(), o1.data.data(),
                          p1.data.data(), batch, l, l, width, heads);
        },
        5);
    const double tp = time_ms(
        [&] {
          sdpa_raw(q.data.data(), k.data.data(), v.data.data(), o2.data.data(), p2.data.data(),
                   batch, l, l, width, heads);
        },
        5);
    bool same = true;
    for (std::size_t i = 0; i < o1.size(); ++i) same = same && o1.data[i] == o2.data[i];
    std::printf("%-18s b=%4zu %12.3f %12.3f %8.2fx %9s\n", "attention core", batch, ts, tp,
                ts / tp, same ? "yes" : "NO");
  }

  for (std::size_t rows : {256u, 4096u}) {
    const std::size_t width = 768;
    const Tensor x = random_matrix(rows, width, prng);
    const Tensor g = Tensor::ones({width});
    const Tensor bb = Tensor::zeros({width});
    Tensor y1({rows, width}), y2({rows, width});
    const double ts = time_ms(
        [&] {
          for (std::size_t i = 0; i < rows; ++i) {
            layer_norm_row(x.data.data() + i * width, g.data.data(), bb.data.data(), 1e-5f,
                           y1.data.data() + i * width, width);
          }
        },
        5);
    const double tp = time_ms(
        [&] {
          layer_norm_rows_raw(x.data.data(), g.data.data(), bb.data.data(), 1e-5f,
                              y2.data.data(), rows, width);
        },
        5);
    bool same = true;
    for (std::size_t i = 0; i < y1.size(); ++i) same = same && y1.data[i] == y2.data[i];
    std::printf("%-16s r=%6zu %12.3f %12.3f %8.2fx %9s\n", "layer norm", rows, ts, tp, ts / tp,
                same ? "yes" : "NO");
  }
  return 0;
}
