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

#include "hoi/features.h"
#include "hoi/prng.h"
#include "test_util.h"

using namespace hoi;

namespace {

// Pixel-count reference: boxes snapped to the pixel lattice are counted
// per patch and normalized. Matches the analytic weights exactly on
// lattice-aligned boxes.
std::vector<double> patch_weights_pixel_oracle(const Box& box, std::size_t grid_l,
                                               std::size_t px_per_side) {
  const std::size_t total_px = px_per_side;
  const std::size_t patch_px = total_px / grid_l;
  std::vector<double> counts(grid_l * grid_l, 0.0);
  double total = 0;
  for (std::size_t py = 0; py < total_px; ++py) {
    for (std::size_t px = 0; px < total_px; ++px) {
      const double x0 = static_cast<double>(px) / total_px;
      const double x1 = static_cast<double>(px + 1) / total_px;
      const double y0 = static_cast<double>(py) / total_px;
      const double y1 = static_cast<double>(py + 1) / total_px;
      if (x0 >= box.x1 - 1e-12 && x1 <= box.x2 + 1e-12 && y0 >= box.y1 - 1e-12 &&
          y1 <= box.y2 + 1e-12) {
        counts[(py / patch_px) * grid_l + (px / patch_px)] += 1.0;
        total += 1.0;
      }
    }
  }
  for (double& c : counts) c /= total;
  return counts;
}

Box random_lattice_box(Prng& prng, std::size_t px_per_side) {
  const auto n = static_cast<std::int64_t>(px_per_side);
  std::int64_t x1 = static_cast<std::int64_t>(prng.uniform_index(n));
  std::int64_t x2 = x1 + 1 + static_cast<std::int64_t>(prng.uniform_index(n - x1));
  std::int64_t y1 = static_cast<std::int64_t>(prng.uniform_index(n));
  std::int64_t y2 = y1 + 1 + static_cast<std::int64_t>(prng.uniform_index(n - y1));
  const double s = 1.0 / static_cast<double>(n);
  return Box{x1 * s, y1 * s, x2 * s, y2 * s};
}

}  // namespace

TEST_CASE("patch_weights is one-hot for a box covering exactly one patch") {
  // Patch (row 2, col 3) of a 16x16 grid.
  const Box box{3.0 / 16, 2.0 / 16, 4.0 / 16, 3.0 / 16};
  const auto w = patch_weights(box, 16);
  REQUIRE(w.size() == 256);
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (l == 2 * 16 + 3) {
      CHECK(w[l] == doctest::Approx(1.0).epsilon(1e-12));
    } else {
      CHECK(w[l] == 0.0);
    }
  }
}

TEST_CASE("patch_weights splits evenly over two fully covered patches") {
  const Box box{3.0 / 16, 2.0 / 16, 5.0 / 16, 3.0 / 16};
  const auto w = patch_weights(box, 16);
  CHECK(w[2 * 16 + 3] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[2 * 16 + 4] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("patch_weights rejects degenerate boxes and sums to one") {
  CHECK_THROWS_AS(patch_weights(Box{0.5, 0.5, 0.5, 0.9}, 16), ContractError);
  Prng prng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const Box b = random_lattice_box(prng, 224);
    const auto w = patch_weights(b, 16);
    double s = 0;
    for (double v : w) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("patch_weights matches the pixel-count oracle on 1000 seeded boxes") {
  Prng prng(1551);
  double max_err = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Box b = random_lattice_box(prng, 224);
    const auto analytic = patch_weights(b, 16);
    const auto pixel = patch_weights_pixel_oracle(b, 16, 224);
    for (std::size_t l = 0; l < analytic.size(); ++l) {
      max_err = std::max(max_err, std::abs(analytic[l] - pixel[l]));
    }
  }
  CHECK(max_err <= 1e-5);
}

TEST_CASE("patch_merge selects, averages, and weights rows") {
  const TensorD tokens = TensorD::from_rows({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
  std::vector<double> onehot = {0.0, 1.0, 0.0};
  const TensorD sel = patch_merge(onehot, tokens);
  CHECK(sel.data[0] == 3.0);
  CHECK(sel.data[1] == 4.0);

  std::vector<double> uniform(3, 1.0 / 3.0);
  const TensorD mean = patch_merge(uniform, tokens);
  CHECK(mean.data[0] == doctest::Approx(3.0));
  CHECK(mean.data[1] == doctest::Approx(4.0));

  std::vector<double> w = {0.2, 0.5, 0.3};
  const TensorD m = patch_merge(w, tokens);
  CHECK(m.data[0] == doctest::Approx(0.2 * 1 + 0.5 * 3 + 0.3 * 5));
  CHECK(m.data[1] == doctest::Approx(0.2 * 2 + 0.5 * 4 + 0.3 * 6));

  std::vector<double> bad = {1.0, 0.0};
  CHECK_THROWS_AS(patch_merge(bad, tokens), ShapeError);
}

TEST_CASE("merged tokens stay inside the convex hull of patch tokens") {
  Prng prng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const Box b = random_lattice_box(prng, 224);
    const auto w = patch_weights(b, 4);
    const TensorD tokens = hoi::testing::random_tensor({16, 5}, prng);
    const TensorD merged = patch_merge(w, tokens);
    for (std::size_t j = 0; j < 5; ++j) {
      double lo = tokens.at(0, j), hi = tokens.at(0, j);
      for (std::size_t l = 1; l < 16; ++l) {
        lo = std::min(lo, tokens.at(l, j));
        hi = std::max(hi, tokens.at(l, j));
      }
      CHECK(merged.data[j] >= lo - 1e-12);
      CHECK(merged.data[j] <= hi + 1e-12);
    }
  }
}

TEST_CASE("fourier features at the origin corner") {
  Prng prng(4);
  const TensorD freqs = hoi::testing::random_tensor({5, 2}, prng, 3.0);
  // Box with the top-left corner at (0,0): its sin block is zero, cos block one.
  const TensorD f = fourier_features(Box{0.0, 0.0, 0.6, 0.7}, freqs);
  REQUIRE(f.size() == 20);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(f.data[i] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.data[5 + i] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fourier features closed-form with identity frequencies") {
  const TensorD freqs = TensorD::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const TensorD f = fourier_features(Box{0.25, 0.25, 0.75, 0.75}, freqs);
  REQUIRE(f.size() == 8);
  // Corner (0.25, 0.25): sin(pi/2) = 1 for both axes; cos(pi/2) = 0.
  CHECK(f.data[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.data[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.data[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.data[3] == doctest::Approx(0.0).epsilon(1e-12));
  // Corner (0.75, 0.75): sin(3pi/2) = -1; cos(3pi/2) = 0.
  CHECK(f.data[4] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.data[5] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.data[6] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.data[7] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fourier features are deterministic per box") {
  Prng prng(5);
  const TensorD freqs = hoi::testing::random_tensor({6, 2}, prng);
  const Box b{0.1, 0.2, 0.5, 0.9};
  const TensorD f1 = fourier_features(b, freqs);
  const TensorD f2 = fourier_features(b, freqs);
  for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1.data[i] == f2.data[i]);
}

TEST_CASE("context_pool averages element-wise") {
  const TensorD a = TensorD::row({1.0, 2.0});
  CHECK(context_pool<double>({a}).data[0] == 1.0);

  const TensorD v = TensorD::row({0.5, -1.0});
  const TensorD nv = TensorD::row({-0.5, 1.0});
  const TensorD z = context_pool<double>({v, nv});
  CHECK(z.data[0] == 0.0);
  CHECK(z.data[1] == 0.0);

  Prng prng(6);
  const TensorD x = hoi::testing::random_tensor({1, 4}, prng);
  const TensorD y = hoi::testing::random_tensor({1, 4}, prng);
  const TensorD w = hoi::testing::random_tensor({1, 4}, prng);
  const TensorD m = context_pool<double>({x, y, w});
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(m.data[j] == doctest::Approx((x.data[j] + y.data[j] + w.data[j]) / 3.0));
  }
  CHECK_THROWS_AS(context_pool<double>({}), ContractError);
}

TEST_CASE("hash text embedder is deterministic, unit norm, and collision free") {
  HashTextEmbedder emb(768);
  const Tensor a = emb.embed("cup");
  const Tensor b = emb.embed("cup");
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data[i] == b.data[i]);

  double norm = 0;
  for (float v : a.data) norm += static_cast<double>(v) * v;
  CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-6);

  const std::vector<std::string> vocab = {"cup",    "bottle", "bowl",  "laptop",
                                          "person", "chair",  "table", "phone"};
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    for (std::size_t j = i + 1; j < vocab.size(); ++j) {
      const Tensor x = emb.embed(vocab[i]);
      const Tensor y = emb.embed(vocab[j]);
      double dot = 0;
      for (std::size_t k = 0; k < x.size(); ++k) dot += static_cast<double>(x.data[k]) * y.data[k];
      CHECK(dot < 0.99);  // unit vectors, so the dot is the cosine
    }
  }

  CHECK_THROWS_AS(emb.embed(""), ContractError);
}
