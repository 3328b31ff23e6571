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

#ifndef SVS_TRAINER_CONFIG_H_
#define SVS_TRAINER_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svs/dsp/features.h"
#include "svs/flow/flow.h"
#include "svs/nn/optim.h"
#include "svs/posterior/posterior.h"
#include "svs/prior/prior.h"
#include "svs/prior/speaker_encoder.h"
#include "svs/vocoder/vocoder.h"

namespace svs::trainer {

struct LossWeights {
  double mel = 45.0;
  double feature_matching = 2.0;
  double adversarial = 1.0;
  double kl = 1.0;
  double ctc = 1.0;
  double duration = 1.0;
  double pitch = 1.0;
  double energy = 1.0;
};

struct TrainConfig {
  uint64_t seed = 1234;
  double learning_rate = 1e-4;
  double lr_decay = 0.999875;
  nn::AdamWConfig optimizer;
  int batch_size = 16;
  int pretrain_steps = 2000;
  int finetune_steps = 4000;
  int segment_frames = 32;
  double reverse_kl_weight = flow::kDefaultReverseWeight;
  double reverse_kl_temperature = 1.0;
  double noise_scale = 0.667;
  int log_every = 1;
  int checkpoint_every = 0;
  int validate_every = 0;
  LossWeights weights;

  std::string lexicon_path;    // empty: built-in phoneme set
  std::string syllables_path;  // empty: built-in syllable table

  dsp::FeatureConfig features;
  posterior::PosteriorConfig posterior;
  posterior::PhonemePredictorConfig phoneme_predictor;
  prior::SpeakerEncoderConfig speaker_encoder;
  prior::PriorConfig prior;
  flow::FlowConfig flow;
  vocoder::DecoderConfig decoder;
  vocoder::DiscriminatorConfig discriminator;

  // Throws on invalid values; returns advisory warnings.
  std::vector<std::string> validate() const;
};

nlohmann::ordered_json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path);

// base_lr * decay^step.
double step_lr(long step, double base_lr = 1e-4, double decay = 0.999875);
double step_lr(const TrainConfig& config, long step);

}  // namespace svs::trainer

#endif  // SVS_TRAINER_CONFIG_H_
