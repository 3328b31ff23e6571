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

#ifndef SVS_PRIOR_SPEAKER_ENCODER_H_
#define SVS_PRIOR_SPEAKER_ENCODER_H_

#include <vector>

#include "svs/core/rng.h"
#include "svs/nn/layers.h"

namespace svs::prior {

inline constexpr int kSpeakerDim = 192;

struct SpeakerEmbedding {
  nn::Tensor vec;         // [1 x 192] pooled
  nn::Tensor frame_vecs;  // [T x 192], empty for corpus-level embeddings
};

struct SpeakerEncoderConfig {
  int n_mels = 80;
  int channels = 128;
  int embedding = kSpeakerDim;
  int attention_channels = 64;
  std::vector<int> dilations = {2, 3, 4};
  int min_frames = 8;
};

// Channel-reduced ECAPA-style encoder: TDNN front, dilated residual blocks
// with squeeze-excitation, multi-layer aggregation and attentive statistics
// pooling.
class SpeakerEncoder {
 public:
  SpeakerEncoder() = default;
  SpeakerEncoder(nn::ParameterStore& store, Rng& rng,
                 const SpeakerEncoderConfig& config);

  SpeakerEmbedding speaker_encode(const nn::Tensor& mel) const;
  SpeakerEmbedding speaker_encode(const nn::Tensor& mel,
                                  const nn::Tensor& mask) const;

  const SpeakerEncoderConfig& config() const { return config_; }

 private:
  struct Block {
    nn::Conv1d reduce;
    nn::Conv1d dilated;
    nn::Conv1d expand;
    nn::Linear se_down;
    nn::Linear se_up;
  };

  SpeakerEncoderConfig config_;
  nn::Conv1d front_;
  std::vector<Block> blocks_;
  nn::Conv1d aggregate_;
  nn::Conv1d attention_hidden_;
  nn::Conv1d attention_out_;
  nn::Linear pooled_proj_;
  nn::LayerNorm pooled_norm_;
  nn::Linear frame_proj_;
};

// Mean of pooled utterance embeddings; order-invariant. Runs without
// gradient recording, so the result is a fixed condition.
SpeakerEmbedding average_speaker_embedding(const SpeakerEncoder& encoder,
                                           const std::vector<Matrix>& mels);

// Arithmetic mean of already-pooled embeddings.
Matrix mean_embedding(const std::vector<Matrix>& pooled);

}  // namespace svs::prior

#endif  // SVS_PRIOR_SPEAKER_ENCODER_H_
