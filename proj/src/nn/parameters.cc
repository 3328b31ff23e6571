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

#include "svs/nn/parameters.h"

#include <cmath>

namespace svs::nn {

Tensor ParameterStore::create(const std::string& name, Matrix init) {
  require(!params_.count(name), "duplicate parameter name: " + name);
  Tensor t(std::move(init), true);
  t.zero_grad();
  params_.emplace(name, t);
  return t;
}

bool ParameterStore::contains(const std::string& name) const {
  return params_.count(name) > 0;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  require(it != params_.end(), "unknown parameter: " + name);
  return it->second;
}

std::string ParameterStore::group_of(const std::string& name) {
  return name.substr(0, name.find('.'));
}

std::vector<Tensor> ParameterStore::tensors_in_groups(
    const std::set<std::string>& groups) const {
  std::vector<Tensor> out;
  for (const auto& [name, t] : params_)
    if (groups.count(group_of(name))) out.push_back(t);
  return out;
}

std::set<std::string> ParameterStore::groups() const {
  std::set<std::string> out;
  for (const auto& [name, t] : params_) out.insert(group_of(name));
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : params_) {
    Tensor copy = t;
    copy.zero_grad();
  }
}

double ParameterStore::grad_norm(const std::set<std::string>& groups) const {
  double acc = 0.0;
  for (const auto& [name, t] : params_) {
    if (!groups.count(group_of(name)) || !t.has_grad()) continue;
    acc += t.grad().cast<double>().squaredNorm();
  }
  return std::sqrt(acc);
}

size_t ParameterStore::num_elements() const {
  size_t n = 0;
  for (const auto& [name, t] : params_) n += static_cast<size_t>(t.value().size());
  return n;
}

Matrix init_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                   Eigen::Index fan_in, Init init) {
  switch (init) {
    case Init::kZero:
      return Matrix::Zero(rows, cols);
    case Init::kOne:
      return Matrix::Ones(rows, cols);
    case Init::kUniformFanIn:
    default: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      return rng.uniform_matrix<Real>(rows, cols, -bound, bound);
    }
  }
}

}  // namespace svs::nn
