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

#ifndef HOI_PRNG_H_
#define HOI_PRNG_H_

#include <cmath>
#include <cstdint>
#include <string>

namespace hoi {

inline constexpr std::uint64_t kDefaultSeed = 1551;

// SplitMix64 output mix. Pure integer arithmetic, so the stream is identical
// on every platform for a given seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stateless hash of a (seed, a, b, c, d) coordinate tuple. Used by the
// synthetic feature provider so any token can be generated independently.
inline std::uint64_t hash_coords(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x00000100000001B3ULL;
  }
  return h;
}

// Counter-based generator: the state is a 64-bit counter derived from the
// seed and each draw hashes the next counter value.
class Prng {
 public:
  explicit Prng(std::uint64_t seed = kDefaultSeed) : counter_(mix64(seed ^ 0x5851F42D4C957F2DULL)) {}

  std::uint64_t next_u64() { return mix64(counter_++); }

  // Independent sub-stream; safe for parallel batch assembly.
  Prng fork(std::uint64_t stream) const { return Prng(mix64(counter_ ^ mix64(stream))); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; one value per draw pair kept for simplicity.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Gaussian resampled until it lies within two standard deviations.
  double truncated_gaussian(double stddev) {
    for (;;) {
      double g = gaussian();
      if (g >= -2.0 && g <= 2.0) return g * stddev;
    }
  }

 private:
  std::uint64_t counter_;
};

}  // namespace hoi

#endif  // HOI_PRNG_H_
