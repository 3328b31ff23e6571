// Copyright (c) 2026 The SVS Toolkit Authors
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

#ifndef SVS_TESTS_GRADCHECK_H_
#define SVS_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "svs/core/rng.h"
#include "svs/nn/tensor.h"

namespace svs::testing {

// Compares the analytic directional derivative against a central difference
// along a random unit direction per input. Returns the worst relative error.
inline double directional_grad_error(
    const std::function<nn::Tensor(const std::vector<nn::Tensor>&)>& f,
    std::vector<Matrix> inputs, uint64_t seed = 7, double step = 1e-2) {
  std::vector<nn::Tensor> params;
  for (auto& m : inputs) params.emplace_back(m, true);
  nn::Tensor loss = f(params);
  nn::backward(loss);

  Rng rng(seed);
  double worst = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    Matrix dir = rng.normal_matrix<Real>(inputs[i].rows(), inputs[i].cols());
    dir /= dir.norm();
    const double analytic =
        params[i].has_grad() ? params[i].grad().cwiseProduct(dir).sum() : 0.0;
    auto eval = [&](double h) {
      std::vector<nn::Tensor> shifted;
      for (size_t j = 0; j < inputs.size(); ++j)
        shifted.emplace_back(j == i ? Matrix(inputs[j] + static_cast<Real>(h) * dir)
                                    : inputs[j]);
      nn::NoGradGuard guard;
      return static_cast<double>(f(shifted).item());
    };
    const double numeric = (eval(step) - eval(-step)) / (2 * step);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-2});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  }
  return worst;
}

}  // namespace svs::testing

#endif  // SVS_TESTS_GRADCHECK_H_
