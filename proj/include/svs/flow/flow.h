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

#ifndef SVS_FLOW_FLOW_H_
#define SVS_FLOW_FLOW_H_

#include <vector>

#include "svs/core/rng.h"
#include "svs/nn/layers.h"
#include "svs/posterior/posterior.h"
#include "svs/prior/prior.h"

namespace svs::flow {

struct FlowConfig {
  int channels = 192;
  int hidden = 192;
  int kernel = 5;
  int couplings = 4;
  int coupling_layers = 2;  // residual convs inside each coupling
  int cond_channels = 192;  // 0 disables conditioning
};

struct FlowResult {
  nn::Tensor z;       // [T x channels]
  nn::Tensor logdet;  // [1 x 1], summed over unmasked frames
  double logdet_sum = 0.0;  // same quantity accumulated in double, no graph
};

// Affine coupling: the first channel half conditions a shift and a
// tanh-bounded log-scale for the second half. Output layers start at zero, so
// a fresh coupling is the identity. Channels are reversed after every layer.
class CouplingLayer {
 public:
  CouplingLayer() = default;
  CouplingLayer(nn::ParameterStore& store, Rng& rng, const std::string& name,
                const FlowConfig& config);

  FlowResult forward(const nn::Tensor& z, const nn::Tensor& mask,
                     const nn::Tensor& cond) const;
  FlowResult inverse(const nn::Tensor& y, const nn::Tensor& mask,
                     const nn::Tensor& cond) const;

  nn::Linear& post() { return post_; }

 private:
  // Returns shift and log-scale for the second half.
  std::pair<nn::Tensor, nn::Tensor> transform(const nn::Tensor& x0,
                                              const nn::Tensor& mask,
                                              const nn::Tensor& cond) const;

  int half_ = 0;
  nn::Linear pre_;
  nn::Linear cond_proj_;
  std::vector<nn::Conv1d> convs_;
  nn::Linear post_;
  bool conditioned_ = false;
};

class FlowStack {
 public:
  FlowStack() = default;
  FlowStack(nn::ParameterStore& store, Rng& rng, const FlowConfig& config);

  FlowResult forward(const nn::Tensor& z, const nn::Tensor& mask,
                     const nn::Tensor& cond = {}) const;
  FlowResult inverse(const nn::Tensor& y, const nn::Tensor& mask,
                     const nn::Tensor& cond = {}) const;

  const FlowConfig& config() const { return config_; }
  std::vector<CouplingLayer>& layers() { return layers_; }

 private:
  void check(const nn::Tensor& x, const nn::Tensor& mask,
             const nn::Tensor& cond) const;

  FlowConfig config_;
  std::vector<CouplingLayer> layers_;
};

struct KlTerms {
  nn::Tensor forward;  // [1 x 1]
  nn::Tensor reverse;  // [1 x 1]
  nn::Tensor total;    // forward + reverse_weight * reverse
};

inline constexpr double kDefaultReverseWeight = 0.5;

// Single-sample estimate of KL(q || p) with q pushed through the flow,
// per unmasked frame.
nn::Tensor kl_forward(const posterior::LatentPosterior& q,
                      const prior::PriorDistribution& p, const FlowStack& flow,
                      const nn::Tensor& mask, const nn::Tensor& cond = {});

// Single-sample estimate of KL(p || q) with a prior draw pulled back through
// the inverse flow, per unmasked frame.
nn::Tensor kl_reverse(const posterior::LatentPosterior& q,
                      const prior::PriorDistribution& p, const FlowStack& flow,
                      const nn::Tensor& mask, const nn::Tensor& cond, Rng& rng,
                      double temperature = 1.0);

KlTerms bidirectional_kl(const posterior::LatentPosterior& q,
                         const prior::PriorDistribution& p,
                         const FlowStack& flow, const nn::Tensor& mask,
                         const nn::Tensor& cond, Rng& rng,
                         double reverse_weight = kDefaultReverseWeight,
                         double temperature = 1.0);

}  // namespace svs::flow

#endif  // SVS_FLOW_FLOW_H_
