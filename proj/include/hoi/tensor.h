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

#ifndef HOI_TENSOR_H_
#define HOI_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hoi {

// Thrown when operand shapes do not line up.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a value violates an operation's contract (wrong range,
// empty input, non-scalar loss, ...).
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for invalid model / optimizer configurations.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

// Dense row-major tensor. Immutable by convention once an op has produced
// it; kernels never alias input and output storage.
template <typename T>
struct TensorT {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  TensorT() = default;

  explicit TensorT(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(element_count(shape), T(0));
  }

  TensorT(std::vector<std::size_t> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != element_count(shape)) {
      throw ShapeError("tensor data size " + std::to_string(data.size()) +
                       " does not match shape " + shape_to_string(shape));
    }
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t e : s) {
      if (e == 0) throw ShapeError("zero extent in shape " + shape_to_string(s));
      n *= e;
    }
    return n;
  }

  static TensorT zeros(std::vector<std::size_t> s) { return TensorT(std::move(s)); }

  static TensorT full(std::vector<std::size_t> s, T v) {
    TensorT t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  static TensorT ones(std::vector<std::size_t> s) { return full(std::move(s), T(1)); }

  static TensorT identity(std::size_t n) {
    TensorT t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = T(1);
    return t;
  }

  static TensorT row(std::vector<T> d) {
    std::size_t n = d.size();
    return TensorT({1, n}, std::move(d));
  }

  static TensorT vec(std::vector<T> d) {
    std::size_t n = d.size();
    return TensorT({n}, std::move(d));
  }

  static TensorT from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    std::size_t r = rows.size();
    std::size_t c = rows.begin()->size();
    TensorT t({r, c});
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw ShapeError("ragged initializer");
      for (T v : row) t.data[i++] = v;
    }
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t ndim() const { return shape.size(); }

  // Row/col accessors for the (very common) 2-D case.
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  T& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  T at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  T& operator[](std::size_t i) { return data[i]; }
  T operator[](std::size_t i) const { return data[i]; }

  bool same_shape(const TensorT& o) const { return shape == o.shape; }

  bool is_scalar() const { return size() == 1; }

  T scalar() const {
    if (!is_scalar()) {
      throw ContractError("expected scalar tensor, got shape " + shape_to_string(shape));
    }
    return data[0];
  }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

}  // namespace hoi

#endif  // HOI_TENSOR_H_
