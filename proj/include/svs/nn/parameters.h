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

#ifndef SVS_NN_PARAMETERS_H_
#define SVS_NN_PARAMETERS_H_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "svs/core/rng.h"
#include "svs/nn/tensor.h"

namespace svs::nn {

// Named registry of trainable tensors. Names are dot-separated; the first
// component is the module group ("posterior", "flow", ...) used by stage
// selection and checkpoint transfer. Iteration order is lexicographic, which
// keeps serialization and optimizer state deterministic.
class ParameterStore {
 public:
  Tensor create(const std::string& name, Matrix init);

  bool contains(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  const std::map<std::string, Tensor>& all() const { return params_; }

  std::vector<Tensor> tensors_in_groups(const std::set<std::string>& groups) const;
  std::set<std::string> groups() const;

  void zero_grad();
  double grad_norm(const std::set<std::string>& groups) const;
  size_t num_elements() const;

  static std::string group_of(const std::string& name);

 private:
  std::map<std::string, Tensor> params_;
};

enum class Init { kUniformFanIn, kZero, kOne };

Matrix init_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                   Eigen::Index fan_in, Init init);

}  // namespace svs::nn

#endif  // SVS_NN_PARAMETERS_H_
