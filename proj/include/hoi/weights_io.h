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
// Binary weight files: "HOIW" magic, format version, config echo with the
// class vocabulary, named little-endian float32 parameter blocks, and a
// trailing 64-bit checksum over the payload. Round trips are bit exact.

#ifndef HOI_WEIGHTS_IO_H_
#define HOI_WEIGHTS_IO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "hoi/model.h"

namespace hoi {

class WeightsFileError : public std::runtime_error {
 public:
  explicit WeightsFileError(const std::string& msg) : std::runtime_error(msg) {}
};

struct LoadedWeights {
  ModelWeights weights;
  std::vector<std::string> classes;
};

void save_weights(const ModelWeights& weights, const std::vector<std::string>& classes,
                  const std::string& path);

// Strict load: the file must contain every parameter the config demands.
LoadedWeights load_weights(const std::string& path);

// Stage-transition load: `cfg` may extend the stored horizons; heads present
// in the file are loaded, new ones are freshly initialized from `seed`, and
// every other config field must match the file exactly.
LoadedWeights load_weights_for_config(const std::string& path, const ModelConfig& cfg,
                                      std::uint64_t seed);

}  // namespace hoi

#endif  // HOI_WEIGHTS_IO_H_
