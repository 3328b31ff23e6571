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

#include "svs/prior/upsampler.h"

#include "svs/nn/ops.h"

namespace svs::prior {

std::vector<int> hard_assignment(const std::vector<int>& durations) {
  std::vector<int> owner;
  for (size_t i = 0; i < durations.size(); ++i) {
    require(durations[i] >= 0, "hard_assignment: negative duration");
    owner.insert(owner.end(), durations[i], static_cast<int>(i));
  }
  return owner;
}

nn::Tensor duration_projection(const nn::Tensor& durations, Eigen::Index frames,
                               Real temperature) {
  require(durations.cols() == 1,
          "differentiable_upsample: durations must be a column");
  const Eigen::VectorXd d = durations.value().col(0).cast<double>();
  const double tau = temperature;
  Eigen::MatrixXd w = soft_projection<double>(d, frames, tau);
  Matrix value = w.cast<Real>();
  return nn::Tensor::from_op(
      std::move(value), {durations},
      [d, w = std::move(w), tau](nn::Node& n) {
        const Eigen::MatrixXd gw = n.grad.cast<double>();
        const Eigen::VectorXd gd = soft_projection_vjp<double>(d, w, gw, tau);
        n.inputs[0]->accumulate(gd.cast<Real>());
      });
}

UpsampleResult differentiable_upsample(const nn::Tensor& hidden,
                                       const nn::Tensor& durations,
                                       Eigen::Index frames, Real temperature) {
  require(hidden.rows() == durations.rows(),
          "differentiable_upsample: " + std::to_string(hidden.rows()) +
              " phonemes but " + std::to_string(durations.rows()) +
              " durations");
  UpsampleResult out;
  out.projection = duration_projection(durations, frames, temperature);
  out.frame_hidden = nn::matmul(out.projection, hidden);
  return out;
}

}  // namespace svs::prior
