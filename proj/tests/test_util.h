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

#ifndef HOI_TESTS_TEST_UTIL_H_
#define HOI_TESTS_TEST_UTIL_H_

#include <cmath>
#include <functional>
#include <vector>

#include "hoi/autodiff.h"
#include "hoi/prng.h"
#include "hoi/tensor.h"

namespace hoi::testing {

inline TensorD random_tensor(std::vector<std::size_t> shape, Prng& prng, double scale = 1.0) {
  TensorD t(std::move(shape));
  for (auto& v : t.data) v = prng.uniform(-scale, scale);
  return t;
}

inline Tensor random_tensor_f(std::vector<std::size_t> shape, Prng& prng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(prng.uniform(-scale, scale));
  return t;
}

// Builds the scalar loss from parameter variables bound on the given tape.
using LossBuilder =
    std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central finite differences against the tape's analytic gradients. Every
// element of every parameter is perturbed; relative error uses a floor so
// near-zero derivative pairs compare absolutely.
inline GradcheckResult gradcheck(std::vector<TensorD> params, const LossBuilder& build,
                                 double step = 1e-4) {
  auto eval = [&](const std::vector<TensorD>& ps) {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    vars.reserve(ps.size());
    for (const TensorD& p : ps) vars.push_back(tape.input(p));
    return tape.val(build(tape, vars)).scalar();
  };

  Tape<double> tape;
  std::vector<Var<double>> vars;
  vars.reserve(params.size());
  for (const TensorD& p : params) vars.push_back(tape.param(p));
  Var<double> loss = build(tape, vars);
  tape.backward(loss);

  GradcheckResult res;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const TensorD analytic = tape.grad(vars[pi]);
    for (std::size_t i = 0; i < params[pi].size(); ++i) {
      std::vector<TensorD> plus = params, minus = params;
      plus[pi].data[i] += step;
      minus[pi].data[i] -= step;
      const double fd = (eval(plus) - eval(minus)) / (2 * step);
      const double a = analytic.data[i];
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-6});
      res.max_rel_error = std::max(res.max_rel_error, std::abs(a - fd) / denom);
      ++res.checked;
    }
  }
  return res;
}

}  // namespace hoi::testing

#endif  // HOI_TESTS_TEST_UTIL_H_
