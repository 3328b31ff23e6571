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

#ifndef SVS_PRIOR_PRIOR_H_
#define SVS_PRIOR_PRIOR_H_

#include <span>
#include <vector>

#include "svs/core/rng.h"
#include "svs/nn/layers.h"
#include "svs/prior/speaker_encoder.h"
#include "svs/prior/upsampler.h"
#include "svs/score/score.h"

namespace svs::prior {

struct PriorConfig {
  int hidden = 192;
  int phoneme_classes = 62;
  int pitch_ids = 128;
  int duration_ids = 256;  // note lengths are clamped to this many frames
  int note_layers = 6;
  nn::FFTBlockConfig fft;
  int frame_layers = 2;
  int frame_kernel = 5;
  int duration_layers = 3;
  int duration_kernel = 3;
  int variance_layers = 2;
  int variance_kernel = 3;
  Real temperature = 1.0f;
};

struct PriorDistribution {
  nn::Tensor mean;     // [T x hidden]
  nn::Tensor log_var;  // [T x hidden]
};

struct DurationRatios {
  nn::Tensor ratios;           // [P x 1]
  nn::Tensor durations_frames; // [P x 1]
};

struct FrameVariance {
  nn::Tensor log_f0;        // [T x 1]
  nn::Tensor voiced_logit;  // [T x 1]
  nn::Tensor energy;        // [T x 1], log frame RMS
  nn::Tensor embedding;     // [T x hidden]
};

// Optional teacher-forcing targets for the variance embeddings.
struct VarianceTargets {
  Matrix log_f0;  // [T x 1]
  Matrix voiced;  // [T x 1] in {0, 1}
  Matrix energy;  // [T x 1]
};

// Log-Hz centering used by the variance embeddings.
inline constexpr Real kLogF0Center = 5.5f;
inline constexpr Real kLogEnergyFloor = 1e-5f;

class PriorEncoder {
 public:
  PriorEncoder() = default;
  PriorEncoder(nn::ParameterStore& store, Rng& rng, const PriorConfig& config);

  // Phoneme-level path: phoneme + note pitch + note length embeddings.
  nn::Tensor encode_score(const score::MusicalScore& score,
                          const SpeakerEmbedding& speaker) const;
  // Frame-level path: precomputed [T x hidden] embeddings.
  nn::Tensor encode_frames(const nn::Tensor& frame_embeddings,
                           const nn::Tensor& mask,
                           const SpeakerEmbedding& speaker) const;

  nn::Tensor pitch_embedding(std::span<const int> midi) const;
  const nn::Tensor& phoneme_table() const { return phoneme_embedding_.table; }

  DurationRatios predict_duration(const nn::Tensor& hidden,
                                  const std::vector<int>& note_lengths,
                                  const std::vector<int>& note_index) const;

  // base_log_f0 ([T x 1], may be undefined) is added to the pitch head.
  FrameVariance predict_frame_variance(
      const nn::Tensor& frame_hidden, const nn::Tensor& base_log_f0 = {},
      const VarianceTargets* targets = nullptr) const;

  PriorDistribution frame_prior(const nn::Tensor& frame_hidden,
                                const nn::Tensor& mask) const;

  const PriorConfig& config() const { return config_; }

 private:
  nn::Tensor speaker_condition(const SpeakerEmbedding& speaker,
                               Eigen::Index rows) const;

  PriorConfig config_;
  nn::Embedding phoneme_embedding_;
  nn::Embedding pitch_embedding_;
  nn::Linear speaker_proj_;
  nn::FFTStack note_encoder_;
  std::vector<nn::Conv1d> frame_convs_;
  std::vector<nn::LayerNorm> frame_norms_;
  nn::Linear frame_proj_;

  nn::Embedding duration_embedding_;
  std::vector<nn::Conv1d> duration_convs_;
  std::vector<nn::LayerNorm> duration_norms_;
  nn::Linear duration_out_;

  std::vector<nn::Conv1d> pitch_convs_;
  std::vector<nn::LayerNorm> pitch_norms_;
  nn::Linear pitch_out_;
  nn::Linear pitch_embed_;
  std::vector<nn::Conv1d> energy_convs_;
  std::vector<nn::LayerNorm> energy_norms_;
  nn::Linear energy_out_;
  nn::Linear energy_embed_;
};

// Softmax of logits within each group of equal note_index.
nn::Tensor group_softmax(const nn::Tensor& logits,
                         const std::vector<int>& note_index);

// Per-phoneme log-Hz baseline from note pitches; rests take the mean of the
// pitched notes (or middle C).
Matrix note_log_f0(const score::MusicalScore& score);

}  // namespace svs::prior

#endif  // SVS_PRIOR_PRIOR_H_
