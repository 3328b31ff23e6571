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

#ifndef SVS_TRAINER_TRAINER_H_
#define SVS_TRAINER_TRAINER_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "svs/dsp/features.h"
#include "svs/flow/flow.h"
#include "svs/nn/optim.h"
#include "svs/posterior/posterior.h"
#include "svs/prior/prior.h"
#include "svs/score/corpus.h"
#include "svs/trainer/checkpoint.h"
#include "svs/trainer/config.h"
#include "svs/vocoder/vocoder.h"

namespace svs::trainer {

// Every module of both stages, registered in one store.
struct SvsModel {
  SvsModel(const TrainConfig& config, uint64_t seed);

  TrainConfig config;
  nn::ParameterStore store;
  posterior::PosteriorEncoder posterior;
  posterior::PhonemePredictor phoneme_predictor;
  prior::SpeakerEncoder speaker_encoder;
  prior::PriorEncoder prior;
  flow::FlowStack flow;
  vocoder::Generator decoder;
  vocoder::Discriminator discriminator;
  vocoder::MelTransform mel;
};

// Groups updated by each stage's generator optimizer.
std::set<std::string> trainable_groups(score::Stage stage);

struct LossReport {
  score::Stage stage = score::Stage::kPretrain;
  long step = 0;
  double lr = 0.0;
  std::map<std::string, double> terms;    // unweighted, batch means
  std::map<std::string, double> weights;  // multiplier per generator term
  double total = 0.0;                     // sum of weight * term
  double disc_loss = 0.0;
  double grad_norm = 0.0;

  std::string to_json_line() const;
};

// Posterior input: log(1 + |STFT|).
Matrix posterior_input(const MatrixT<double>& linear_spec);

class Trainer {
 public:
  Trainer(const TrainConfig& config, score::Stage stage);

  SvsModel& model() { return *model_; }
  const SvsModel& model() const { return *model_; }
  score::Stage stage() const { return stage_; }
  long step() const { return step_; }

  // Fixed speaker condition used by fine-tuning and synthesis.
  void set_speaker_condition(const Matrix& vec);
  const std::optional<Matrix>& speaker_condition() const { return speaker_; }
  // Averages the current encoder over the given utterances.
  void compute_speaker_condition(const std::vector<score::PreparedUtterance>& corpus);

  LossReport pretrain_step(const score::Batch& batch);
  LossReport finetune_step(const score::Batch& batch);
  LossReport train_step(const score::Batch& batch);

  Checkpoint checkpoint() const;
  // Restores parameters, step counter and speaker condition.
  void restore(const Checkpoint& ckpt);
  TransferReport load_pretrained(const Checkpoint& ckpt);

 private:
  void rebuild_optimizers();
  void set_discriminator_grad(bool enabled);
  LossReport finish_step(LossReport report, double batch_size);

  TrainConfig config_;
  score::Stage stage_;
  std::unique_ptr<SvsModel> model_;
  std::unique_ptr<nn::AdamW> gen_opt_;
  std::unique_ptr<nn::AdamW> disc_opt_;
  Rng rng_;
  long step_ = 0;
  std::optional<Matrix> speaker_;
};

struct SynthesisResult {
  dsp::AudioClip audio;
  dsp::F0Contour f0;               // predicted, per frame
  std::vector<double> durations;   // predicted, per phoneme, in frames
  Eigen::Index frames = 0;
};

// Fine-tuned checkpoint -> waveform. Deterministic for a given seed.
SynthesisResult synthesize(const score::MusicalScore& score, const Checkpoint& ckpt,
                           uint64_t seed = 0);
SynthesisResult synthesize(const score::MusicalScore& score, const SvsModel& model,
                           const Matrix& speaker, double noise_scale,
                           uint64_t seed = 0);

// Frame-level f0 implied by the notes (unvoiced on rests).
dsp::F0Contour score_f0(const score::MusicalScore& score);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<int> steps;  // overrides the config's stage step count
  std::optional<std::filesystem::path> init;  // pretrain checkpoint to load
};

struct RunResult {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_log;
  std::vector<LossReport> reports;
};

// Full stage loop: shuffled batches, one JSON line per logged step, atomic
// checkpoint at the end (and every checkpoint_every steps).
RunResult run_stage(const TrainConfig& config, score::Stage stage,
                    const std::vector<score::PreparedUtterance>& corpus,
                    const RunOptions& options);

}  // namespace svs::trainer

#endif  // SVS_TRAINER_TRAINER_H_
