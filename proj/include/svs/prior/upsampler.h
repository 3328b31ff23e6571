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

#ifndef SVS_PRIOR_UPSAMPLER_H_
#define SVS_PRIOR_UPSAMPLER_H_

#include <cmath>

#include "svs/core/types.h"
#include "svs/nn/tensor.h"

namespace svs::prior {

namespace detail {

template <typename Scalar>
Scalar log_sigmoid(Scalar x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return x >= 0 ? 1 / (1 + std::exp(-x)) : std::exp(x) / (1 + std::exp(x));
}

}  // namespace detail

// Soft phoneme-to-frame assignment. With cumulative ends c_i and starts
// c_{i-1}, frame t (center t + 0.5) scores phoneme i by
//   sigmoid((t + 0.5 - c_{i-1}) / tau) * sigmoid((c_i - t - 0.5) / tau)
// and each row is normalized. Computed as a row softmax of log scores so
// frames far outside every span stay finite.
template <typename Scalar>
MatrixT<Scalar> soft_projection(const VectorT<Scalar>& durations,
                                Eigen::Index frames, Scalar temperature) {
  require(frames > 0, "differentiable_upsample: frame count must be positive");
  require(temperature > 0, "differentiable_upsample: temperature must be positive");
  const Eigen::Index p = durations.size();
  require(p > 0, "differentiable_upsample: no phonemes");
  MatrixT<Scalar> w(frames, p);
  Scalar start = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    require(durations(i) > 0, "differentiable_upsample: durations must be positive");
    const Scalar end = start + durations(i);
    for (Eigen::Index t = 0; t < frames; ++t) {
      const Scalar center = static_cast<Scalar>(t) + Scalar(0.5);
      w(t, i) = detail::log_sigmoid((center - start) / temperature) +
                detail::log_sigmoid((end - center) / temperature);
    }
    start = end;
  }
  for (Eigen::Index t = 0; t < frames; ++t) {
    auto row = w.row(t);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return w;
}

// Vector-Jacobian product: given dL/dW, returns dL/d durations.
template <typename Scalar>
VectorT<Scalar> soft_projection_vjp(const VectorT<Scalar>& durations,
                                    const MatrixT<Scalar>& w,
                                    const MatrixT<Scalar>& grad_w,
                                    Scalar temperature) {
  const Eigen::Index p = durations.size();
  const Eigen::Index frames = w.rows();
  // Through the row softmax.
  MatrixT<Scalar> grad_logit = w.cwiseProduct(
      MatrixT<Scalar>(grad_w.colwise() - w.cwiseProduct(grad_w).rowwise().sum()));

  VectorT<Scalar> grad_start = VectorT<Scalar>::Zero(p);
  VectorT<Scalar> grad_end = VectorT<Scalar>::Zero(p);
  Scalar start = 0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const Scalar end = start + durations(i);
    for (Eigen::Index t = 0; t < frames; ++t) {
      const Scalar center = static_cast<Scalar>(t) + Scalar(0.5);
      const Scalar a = (center - start) / temperature;
      const Scalar b = (end - center) / temperature;
      // d/dx log sigmoid(x) = sigmoid(-x).
      grad_start(i) -= grad_logit(t, i) * detail::sigmoid(-a) / temperature;
      grad_end(i) += grad_logit(t, i) * detail::sigmoid(-b) / temperature;
    }
    start = end;
  }
  // end_i = sum_{j<=i} d_j and start_i = sum_{j<i} d_j.
  VectorT<Scalar> grad_d(p);
  Scalar suffix_end = 0, suffix_start = 0;
  for (Eigen::Index j = p - 1; j >= 0; --j) {
    suffix_end += grad_end(j);
    grad_d(j) = suffix_end + suffix_start;
    suffix_start += grad_start(j);
  }
  return grad_d;
}

// Hard length regulation for integer durations: frame t goes to the phoneme
// whose span contains it.
std::vector<int> hard_assignment(const std::vector<int>& durations);

// Graph op: [P x 1] durations -> [T x P] projection matrix.
nn::Tensor duration_projection(const nn::Tensor& durations, Eigen::Index frames,
                               Real temperature);

struct UpsampleResult {
  nn::Tensor frame_hidden;  // [T x C] = W * hidden
  nn::Tensor projection;    // W, [T x P]
};

UpsampleResult differentiable_upsample(const nn::Tensor& hidden,
                                       const nn::Tensor& durations,
                                       Eigen::Index frames,
                                       Real temperature = 1.0f);

}  // namespace svs::prior

#endif  // SVS_PRIOR_UPSAMPLER_H_
