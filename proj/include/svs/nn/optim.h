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

#ifndef SVS_NN_OPTIM_H_
#define SVS_NN_OPTIM_H_

#include <vector>

#include "svs/nn/tensor.h"

namespace svs::nn {

struct AdamWConfig {
  double beta1 = 0.8;
  double beta2 = 0.99;
  double eps = 1e-9;
  double weight_decay = 0.01;
  double max_grad_norm = 0.0;  // 0 disables clipping
};

// Decoupled weight decay Adam. Owns moment estimates for a fixed parameter
// list; parameters outside that list are never touched.
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, AdamWConfig config);

  void zero_grad();
  // Applies one update; returns the pre-clipping gradient norm.
  double step(double lr);
  long steps_taken() const { return step_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  AdamWConfig config_;
  long step_ = 0;
};

}  // namespace svs::nn

#endif  // SVS_NN_OPTIM_H_
