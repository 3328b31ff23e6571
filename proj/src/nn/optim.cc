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

#include "svs/nn/optim.h"

#include <cmath>

namespace svs::nn {

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
  for (const auto& p : params_) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

double AdamW::step(double lr) {
  ++step_;
  double norm_sq = 0.0;
  for (const auto& p : params_)
    if (p.has_grad()) norm_sq += p.grad().cast<double>().squaredNorm();
  const double norm = std::sqrt(norm_sq);
  double clip = 1.0;
  if (config_.max_grad_norm > 0.0 && norm > config_.max_grad_norm)
    clip = config_.max_grad_norm / (norm + 1e-6);

  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  const Real b1 = static_cast<Real>(config_.beta1);
  const Real b2 = static_cast<Real>(config_.beta2);
  const Real step_size = static_cast<Real>(lr / bc1);
  const Real inv_sqrt_bc2 = static_cast<Real>(1.0 / std::sqrt(bc2));
  const Real eps = static_cast<Real>(config_.eps);
  const Real decay = static_cast<Real>(1.0 - lr * config_.weight_decay);

  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (!p.has_grad()) continue;
    const Matrix g = p.grad() * static_cast<Real>(clip);
    m_[i] = b1 * m_[i] + (1 - b1) * g;
    v_[i] = b2 * v_[i] + (1 - b2) * g.cwiseAbs2();
    Matrix& w = p.mutable_value();
    w *= decay;
    w.array() -= step_size * m_[i].array() /
                 (v_[i].array().sqrt() * inv_sqrt_bc2 + eps);
  }
  return norm;
}

}  // namespace svs::nn
