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

#ifndef SVS_POSTERIOR_POSTERIOR_H_
#define SVS_POSTERIOR_POSTERIOR_H_

#include <span>
#include <vector>

#include "svs/core/rng.h"
#include "svs/nn/layers.h"

namespace svs::posterior {

struct LatentPosterior {
  nn::Tensor mean;     // [T x latent]
  nn::Tensor log_var;  // [T x latent]
  nn::Tensor z;        // mean + exp(log_var / 2) * eps, masked
  Matrix eps;          // the scaled standard-normal draw behind z
};

struct PosteriorConfig {
  int in_channels = 513;
  int hidden = 192;
  int latent = 192;
  int kernel = 5;
  int layers = 4;
  int dilation_rate = 1;
};

// Gated dilated-convolution encoder from linear spectrogram to a diagonal
// Gaussian over frame latents.
class PosteriorEncoder {
 public:
  PosteriorEncoder() = default;
  PosteriorEncoder(nn::ParameterStore& store, Rng& rng,
                   const PosteriorConfig& config);

  // noise_scale multiplies the standard-normal draw; 0 gives z = mean.
  LatentPosterior encode(const nn::Tensor& linear_spec, const nn::Tensor& mask,
                         Rng& rng, double noise_scale = 1.0) const;

  const PosteriorConfig& config() const { return config_; }

 private:
  PosteriorConfig config_;
  nn::Conv1d pre_;
  std::vector<nn::Conv1d> in_layers_;
  std::vector<nn::Conv1d> res_skip_;
  nn::Conv1d proj_;
};

struct PhonemePredictorConfig {
  int channels = 192;
  int classes = 62;  // 61 phonemes + blank
  int layers = 2;
  int heads = 2;
  int kernel = 3;
  int ffn_channels = 384;
  bool positional = true;
};

// Frame-level phoneme distribution (blank at index 0).
struct PhonemeProbMatrix {
  nn::Tensor log_probs;  // [T x classes]
  nn::Tensor probs;      // rows sum to 1
};

class PhonemePredictor {
 public:
  PhonemePredictor() = default;
  PhonemePredictor(nn::ParameterStore& store, Rng& rng,
                   const PhonemePredictorConfig& config);

  PhonemeProbMatrix predict_phonemes(const nn::Tensor& z,
                                     const nn::Tensor& mask) const;

 private:
  PhonemePredictorConfig config_;
  nn::FFTStack blocks_;
  nn::Linear head_;
};

// Differentiable CTC loss on a [T x classes] log-probability tensor.
nn::Tensor ctc_loss(const nn::Tensor& log_probs, std::span<const int> target,
                    Eigen::Index input_len, int blank = 0);

// Row t of the result is p_t^T * table: a convex mixture of table rows.
nn::Tensor probs_to_embeddings(const nn::Tensor& probs, const nn::Tensor& table);

}  // namespace svs::posterior

#endif  // SVS_POSTERIOR_POSTERIOR_H_
