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

#include "hoi/weights_io.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

namespace hoi {

namespace {

constexpr char kMagic[4] = {'H', 'O', 'I', 'W'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a64_bytes(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x00000100000001B3ULL;
  }
  return h;
}

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const std::uint8_t* b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    const std::uint8_t* b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    const std::uint8_t* b = take(n);
    return std::string(reinterpret_cast<const char*>(b), n);
  }
  std::size_t offset() const { return off_; }

 private:
  const std::uint8_t* take(std::size_t k) {
    if (off_ + k > n_) throw WeightsFileError("weights file truncated");
    const std::uint8_t* r = p_ + off_;
    off_ += k;
    return r;
  }
  const std::uint8_t* p_;
  std::size_t n_, off_ = 0;
};

void write_config(Writer& w, const ModelConfig& cfg, const std::vector<std::string>& classes) {
  w.u64(cfg.t_obs);
  w.u64(cfg.grid_l);
  w.u64(cfg.d_vis);
  w.u64(cfg.d_box);
  w.u64(cfg.depth);
  w.u64(cfg.heads);
  w.f64(cfg.mlp_ratio);
  w.f64(cfg.dropout);
  w.f64(cfg.threshold);
  w.u8(static_cast<std::uint8_t>(cfg.variant));
  w.u32(static_cast<std::uint32_t>(cfg.horizons.size()));
  for (int tau : cfg.horizons) w.i32(tau);
  w.u64(cfg.num_classes);
  w.u32(static_cast<std::uint32_t>(classes.size()));
  for (const std::string& c : classes) w.str(c);
}

void read_config(Reader& r, ModelConfig& cfg, std::vector<std::string>& classes) {
  cfg.t_obs = r.u64();
  cfg.grid_l = r.u64();
  cfg.d_vis = r.u64();
  cfg.d_box = r.u64();
  cfg.depth = r.u64();
  cfg.heads = r.u64();
  cfg.mlp_ratio = r.f64();
  cfg.dropout = r.f64();
  cfg.threshold = r.f64();
  const std::uint8_t variant = r.u8();
  if (variant > 2) throw WeightsFileError("unknown variant tag in weights file");
  cfg.variant = static_cast<Variant>(variant);
  cfg.horizons.clear();
  const std::uint32_t nh = r.u32();
  for (std::uint32_t i = 0; i < nh; ++i) cfg.horizons.push_back(r.i32());
  cfg.num_classes = r.u64();
  classes.clear();
  const std::uint32_t nc = r.u32();
  for (std::uint32_t i = 0; i < nc; ++i) classes.push_back(r.str());
}

bool config_matches_except_horizons(const ModelConfig& a, const ModelConfig& b) {
  return a.t_obs == b.t_obs && a.grid_l == b.grid_l && a.d_vis == b.d_vis &&
         a.d_box == b.d_box && a.depth == b.depth && a.heads == b.heads &&
         a.mlp_ratio == b.mlp_ratio && a.num_classes == b.num_classes && a.variant == b.variant;
}

}  // namespace

void save_weights(const ModelWeights& weights, const std::vector<std::string>& classes,
                  const std::string& path) {
  Writer w;
  w.u32(kVersion);
  write_config(w, weights.config, classes);
  std::size_t n_params = 0;
  weights.visit([&](const std::string&, const Tensor&, bool) { ++n_params; });
  w.u64(n_params);
  weights.visit([&](const std::string& name, const Tensor& t, bool) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.ndim()));
    for (std::size_t e : t.shape) w.u64(e);
    for (float v : t.data) w.f32(v);
  });
  const std::uint64_t checksum = fnv1a64_bytes(w.bytes().data(), w.bytes().size());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightsFileError("cannot open weights file for writing: " + path);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  Writer tail;
  tail.u64(checksum);
  out.write(reinterpret_cast<const char*>(tail.bytes().data()), 8);
  if (!out) throw WeightsFileError("short write to weights file: " + path);
}

namespace {

struct RawFile {
  ModelConfig cfg;
  std::vector<std::string> classes;
  std::map<std::string, Tensor> params;
};

RawFile read_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsFileError("cannot open weights file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 4 + 4 + 8) throw WeightsFileError("weights file truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw WeightsFileError("bad magic: not a weights file");
  }
  const std::size_t payload = bytes.size() - 4 - 8;
  const std::uint64_t expect = fnv1a64_bytes(bytes.data() + 4, payload);
  Reader tail(bytes.data() + 4 + payload, 8);
  if (tail.u64() != expect) {
    throw WeightsFileError("checksum mismatch: weights file corrupted");
  }
  Reader r(bytes.data() + 4, payload);
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw WeightsFileError("unsupported weights file version " + std::to_string(version));
  }
  RawFile raw;
  read_config(r, raw.cfg, raw.classes);
  const std::uint64_t n_params = r.u64();
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const std::string name = r.str();
    const std::uint32_t ndim = r.u32();
    std::vector<std::size_t> shape(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) shape[d] = r.u64();
    Tensor t(shape);
    for (float& v : t.data) v = r.f32();
    raw.params.emplace(name, std::move(t));
  }
  return raw;
}

}  // namespace

LoadedWeights load_weights(const std::string& path) {
  RawFile raw = read_raw(path);
  LoadedWeights out;
  out.classes = raw.classes;
  out.weights = ModelWeights::init(raw.cfg, 0);
  out.weights.visit([&](const std::string& name, Tensor& t, bool) {
    auto it = raw.params.find(name);
    if (it == raw.params.end()) {
      throw WeightsFileError("weights file missing parameter '" + name + "'");
    }
    if (it->second.shape != t.shape) {
      throw WeightsFileError("parameter '" + name + "' has shape " +
                             shape_to_string(it->second.shape) + ", expected " +
                             shape_to_string(t.shape));
    }
    t = it->second;
  });
  return out;
}

LoadedWeights load_weights_for_config(const std::string& path, const ModelConfig& cfg,
                                      std::uint64_t seed) {
  RawFile raw = read_raw(path);
  if (!config_matches_except_horizons(raw.cfg, cfg)) {
    throw WeightsFileError("checkpoint configuration is incompatible with the requested one");
  }
  std::set<int> file_horizons(raw.cfg.horizons.begin(), raw.cfg.horizons.end());
  for (int tau : raw.cfg.horizons) {
    if (std::find(cfg.horizons.begin(), cfg.horizons.end(), tau) == cfg.horizons.end()) {
      throw WeightsFileError("checkpoint horizon " + std::to_string(tau) +
                             " is not part of the requested configuration");
    }
  }
  LoadedWeights out;
  out.classes = raw.classes;
  out.weights = ModelWeights::init(cfg, seed);
  out.weights.visit([&](const std::string& name, Tensor& t, bool) {
    const bool is_head = name.rfind("head_", 0) == 0;
    if (is_head) {
      const int tau = std::stoi(name.substr(5, name.find('.') - 5));
      if (!file_horizons.count(tau)) return;  // fresh head for a new horizon
    }
    auto it = raw.params.find(name);
    if (it == raw.params.end()) {
      throw WeightsFileError("weights file missing parameter '" + name + "'");
    }
    if (it->second.shape != t.shape) {
      throw WeightsFileError("parameter '" + name + "' has shape " +
                             shape_to_string(it->second.shape) + ", expected " +
                             shape_to_string(t.shape));
    }
    t = it->second;
  });
  return out;
}

}  // namespace hoi
