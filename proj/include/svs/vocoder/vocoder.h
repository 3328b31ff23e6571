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

#ifndef SVS_VOCODER_VOCODER_H_
#define SVS_VOCODER_VOCODER_H_

#include <vector>

#include "svs/core/rng.h"
#include "svs/dsp/features.h"
#include "svs/nn/layers.h"
#include "svs/prior/speaker_encoder.h"

namespace svs::vocoder {

struct DecoderConfig {
  int in_channels = 192;
  int initial_channels = 128;
  std::vector<int> upsample_factors = {8, 8, 4};
  std::vector<int> resblock_kernels = {3};
  std::vector<int> resblock_dilations = {1, 3};
  int harmonics = 8;
  int sample_rate = 24000;
  int hop = 256;

  void validate() const;
};

// Transposed-convolution upsampler with residual blocks and a
// speaker-conditioned input. A harmonic branch adds sinusoids at multiples of
// the frame f0 with learned per-frame amplitudes.
class Generator {
 public:
  Generator() = default;
  Generator(nn::ParameterStore& store, Rng& rng, const DecoderConfig& config);

  // z: [t x in_channels]; f0_hz: [t x 1] or undefined (no harmonic branch).
  // Returns [t * hop x 1].
  nn::Tensor decode(const nn::Tensor& z, const prior::SpeakerEmbedding& speaker,
                    const nn::Tensor& f0_hz = {}) const;

  const DecoderConfig& config() const { return config_; }

 private:
  struct ResBlock {
    std::vector<nn::Conv1d> convs;
  };

  DecoderConfig config_;
  nn::Conv1d conv_pre_;
  nn::Linear cond_;
  nn::Linear amplitude_;
  std::vector<nn::ConvTranspose1d> ups_;
  std::vector<std::vector<ResBlock>> resblocks_;
  nn::Conv1d conv_post_;
};

// [samples x harmonics] sinusoids for a frame-rate f0 held over each hop,
// zeroed where unvoiced or above Nyquist. Phase starts at zero.
Matrix harmonic_bank(const Matrix& f0_frames, int hop, int sample_rate,
                     int harmonics);

struct DiscriminatorConfig {
  std::vector<int> scale_pools = {1, 2};  // 1 = raw, 2 = one 4/2/2 avg pool
  std::vector<int> periods = {2, 3};
  int channels = 16;
  int min_samples = 1024;
};

struct DiscriminatorOutput {
  std::vector<nn::Tensor> scores;                 // one per sub-discriminator
  std::vector<std::vector<nn::Tensor>> features;  // per sub-discriminator
};

class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(nn::ParameterStore& store, Rng& rng,
                const DiscriminatorConfig& config);

  DiscriminatorOutput discriminate(const nn::Tensor& wave) const;
  size_t sub_discriminators() const { return scales_.size() + periods_.size(); }

 private:
  struct Stack {
    std::vector<nn::Conv1d> convs;
    nn::Conv1d post;
  };
  static Stack make_stack(nn::ParameterStore& store, Rng& rng,
                          const std::string& name, int channels, bool period);
  static void run_stack(const Stack& s, const nn::Tensor& x,
                        std::vector<nn::Tensor>& feats, nn::Tensor& score);

  DiscriminatorConfig config_;
  std::vector<Stack> scales_;
  std::vector<Stack> periods_;
};

// Log-mel spectrogram inside the graph, matching dsp::log_mel on the
// magnitude STFT.
class MelTransform {
 public:
  explicit MelTransform(const dsp::FeatureConfig& cfg = {});
  nn::Tensor operator()(const nn::Tensor& wave) const;

 private:
  dsp::FeatureConfig cfg_;
  nn::Tensor window_;     // [1 x n_fft]
  nn::Tensor cos_;        // [n_fft x bins]
  nn::Tensor sin_;        // [n_fft x bins]
  nn::Tensor mel_basis_;  // [bins x mels]
};

nn::Tensor discriminator_loss(const std::vector<nn::Tensor>& real_scores,
                              const std::vector<nn::Tensor>& fake_scores);
nn::Tensor generator_adversarial_loss(const std::vector<nn::Tensor>& fake_scores);
nn::Tensor feature_matching_loss(
    const std::vector<std::vector<nn::Tensor>>& real_features,
    const std::vector<std::vector<nn::Tensor>>& fake_features);
nn::Tensor mel_l1_loss(const MelTransform& mel, const nn::Tensor& real_wave,
                       const nn::Tensor& fake_wave);

struct GanLosses {
  nn::Tensor gen;
  nn::Tensor disc;
  nn::Tensor feat_match;
  nn::Tensor mel;
};

// All four terms for one real/fake pair. The discriminator term sees a
// detached fake; the generator terms see detached real features.
GanLosses gan_losses(const Discriminator& disc, const MelTransform& mel,
                     const nn::Tensor& real_wave, const nn::Tensor& fake_wave);

struct Slice {
  Eigen::Index frame_start = 0;
  Eigen::Index frames = 0;
  Eigen::Index sample_start = 0;
  Eigen::Index samples = 0;
};

// Random window of up to `frames` frames inside the first `valid` frames.
Slice random_slice(Eigen::Index valid, Eigen::Index frames, int hop, Rng& rng);

}  // namespace svs::vocoder

#endif  // SVS_VOCODER_VOCODER_H_
