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

#include "svs/prior/prior.h"

#include <algorithm>
#include <cmath>

#include "svs/dsp/pitch.h"

namespace svs::prior {

using nn::Tensor;

namespace {

void conv_stack(nn::ParameterStore& store, Rng& rng, const std::string& name,
                int layers, int channels, int kernel,
                std::vector<nn::Conv1d>& convs,
                std::vector<nn::LayerNorm>& norms) {
  for (int i = 0; i < layers; ++i) {
    const std::string n = name + ".conv" + std::to_string(i);
    convs.emplace_back(store, rng, n, channels, channels, kernel);
    norms.emplace_back(store, n + ".norm", channels);
  }
}

Tensor run_stack(const Tensor& x, const std::vector<nn::Conv1d>& convs,
                 const std::vector<nn::LayerNorm>& norms) {
  Tensor h = x;
  for (size_t i = 0; i < convs.size(); ++i)
    h = norms[i](nn::relu(convs[i](h)));
  return h;
}

}  // namespace

PriorEncoder::PriorEncoder(nn::ParameterStore& store, Rng& rng,
                           const PriorConfig& config)
    : config_(config) {
  const int h = config.hidden;
  require(config.fft.channels == h, "prior: note encoder width must equal hidden");
  phoneme_embedding_ = nn::Embedding(store, rng, "prior.phoneme_embedding",
                                     config.phoneme_classes, h);
  pitch_embedding_ =
      nn::Embedding(store, rng, "prior.pitch_embedding", config.pitch_ids, h);
  speaker_proj_ = nn::Linear(store, rng, "prior.speaker_proj", kSpeakerDim, h);
  note_encoder_ = nn::FFTStack(store, rng, "prior.note_encoder",
                               config.note_layers, config.fft, true);
  for (int i = 0; i < config.frame_layers; ++i) {
    const std::string n = "prior.frame.conv" + std::to_string(i);
    frame_convs_.emplace_back(store, rng, n, h, h, config.frame_kernel);
    frame_norms_.emplace_back(store, n + ".norm", h);
  }
  frame_proj_ = nn::Linear(store, rng, "prior.frame.proj", h, 2 * h);

  duration_embedding_ = nn::Embedding(store, rng, "duration_regulator.note_embedding",
                                      config.duration_ids + 1, h);
  conv_stack(store, rng, "duration_regulator.predictor", config.duration_layers,
             h, config.duration_kernel, duration_convs_, duration_norms_);
  duration_out_ = nn::Linear(store, rng, "duration_regulator.predictor.out", h, 1);

  conv_stack(store, rng, "pitch_predictor", config.variance_layers, h,
             config.variance_kernel, pitch_convs_, pitch_norms_);
  pitch_out_ = nn::Linear(store, rng, "pitch_predictor.out", h, 2, nn::Init::kZero);
  pitch_embed_ = nn::Linear(store, rng, "pitch_predictor.embed", 2, h);
  conv_stack(store, rng, "energy_predictor", config.variance_layers, h,
             config.variance_kernel, energy_convs_, energy_norms_);
  energy_out_ = nn::Linear(store, rng, "energy_predictor.out", h, 1, nn::Init::kZero);
  energy_embed_ = nn::Linear(store, rng, "energy_predictor.embed", 1, h);
}

Tensor PriorEncoder::speaker_condition(const SpeakerEmbedding& speaker,
                                       Eigen::Index rows) const {
  if (speaker.frame_vecs.defined()) {
    require(speaker.frame_vecs.rows() == rows,
            "encode_score: frame speaker embedding has " +
                std::to_string(speaker.frame_vecs.rows()) + " rows, expected " +
                std::to_string(rows));
    return speaker_proj_(speaker.frame_vecs);
  }
  require(speaker.vec.defined() && speaker.vec.rows() == 1 &&
              speaker.vec.cols() == kSpeakerDim,
          "encode_score: speaker embedding must be [1 x 192]");
  return nn::broadcast_rows(speaker_proj_(speaker.vec), rows);
}

Tensor PriorEncoder::pitch_embedding(std::span<const int> midi) const {
  for (int id : midi)
    require(id >= 0 && id < config_.pitch_ids,
            "pitch id out of range: " + std::to_string(id));
  return pitch_embedding_(midi);
}

Tensor PriorEncoder::encode_score(const score::MusicalScore& score,
                                  const SpeakerEmbedding& speaker) const {
  score.validate(config_.phoneme_classes);
  const Eigen::Index p = static_cast<Eigen::Index>(score.size());
  std::vector<int> lengths = score.note_lengths_per_phoneme();
  for (int& l : lengths) l = std::clamp(l, 0, config_.duration_ids);
  SpeakerEmbedding pooled{speaker.vec, {}};
  Tensor x = nn::add(phoneme_embedding_(score.phoneme_ids),
                     pitch_embedding(score.note_pitch_ids));
  x = nn::add(x, duration_embedding_(lengths));
  x = nn::add(x, speaker_condition(pooled, p));
  return note_encoder_(x, nn::ones_mask(p));
}

Tensor PriorEncoder::encode_frames(const Tensor& frame_embeddings,
                                   const Tensor& mask,
                                   const SpeakerEmbedding& speaker) const {
  require(frame_embeddings.cols() == config_.hidden,
          "encode_score: frame embeddings must have width " +
              std::to_string(config_.hidden));
  require(mask.rows() == frame_embeddings.rows(),
          "encode_score: mask length mismatch");
  Tensor x = nn::add(frame_embeddings,
                     speaker_condition(speaker, frame_embeddings.rows()));
  return note_encoder_(x, mask);
}

Tensor group_softmax(const Tensor& logits, const std::vector<int>& note_index) {
  require(logits.cols() == 1 &&
              logits.rows() == static_cast<Eigen::Index>(note_index.size()),
          "group_softmax: shape mismatch");
  const Eigen::Index p = logits.rows();
  Matrix out(p, 1);
  Eigen::Index start = 0;
  while (start < p) {
    Eigen::Index end = start + 1;
    while (end < p && note_index[end] == note_index[start]) ++end;
    auto seg = logits.value().block(start, 0, end - start, 1);
    Eigen::ArrayXf e = (seg.array() - seg.maxCoeff()).exp();
    out.block(start, 0, end - start, 1) = (e / e.sum()).matrix();
    start = end;
  }
  Matrix r = out;
  return Tensor::from_op(std::move(out), {logits},
                         [r, note_index](nn::Node& n) {
                           Matrix g(r.rows(), 1);
                           Eigen::Index s = 0;
                           while (s < r.rows()) {
                             Eigen::Index e = s + 1;
                             while (e < r.rows() && note_index[e] == note_index[s]) ++e;
                             auto rs = r.block(s, 0, e - s, 1);
                             auto gs = n.grad.block(s, 0, e - s, 1);
                             const Real dot = rs.cwiseProduct(gs).sum();
                             g.block(s, 0, e - s, 1) =
                                 rs.cwiseProduct((gs.array() - dot).matrix());
                             s = e;
                           }
                           n.inputs[0]->accumulate(g);
                         });
}

DurationRatios PriorEncoder::predict_duration(
    const Tensor& hidden, const std::vector<int>& note_lengths,
    const std::vector<int>& note_index) const {
  const Eigen::Index p = hidden.rows();
  require(static_cast<Eigen::Index>(note_lengths.size()) == p &&
              static_cast<Eigen::Index>(note_index.size()) == p,
          "predict_duration: hidden and note durations are not aligned");
  Matrix lengths(p, 1);
  for (Eigen::Index i = 0; i < p; ++i) {
    require(note_lengths[i] > 0, "predict_duration: non-positive note duration");
    lengths(i, 0) = static_cast<Real>(note_lengths[i]);
  }
  Tensor logits = duration_out_(run_stack(hidden, duration_convs_, duration_norms_));
  DurationRatios out;
  out.ratios = group_softmax(logits, note_index);
  out.durations_frames = nn::mul(out.ratios, nn::constant(std::move(lengths)));
  return out;
}

FrameVariance PriorEncoder::predict_frame_variance(
    const Tensor& frame_hidden, const Tensor& base_log_f0,
    const VarianceTargets* targets) const {
  require(frame_hidden.cols() == config_.hidden,
          "predict_frame_variance: hidden width mismatch");
  const Eigen::Index t = frame_hidden.rows();
  FrameVariance out;
  Tensor ph = pitch_out_(run_stack(frame_hidden, pitch_convs_, pitch_norms_));
  out.log_f0 = nn::slice_cols(ph, 0, 1);
  if (base_log_f0.defined()) {
    require(base_log_f0.rows() == t, "predict_frame_variance: base f0 length mismatch");
    out.log_f0 = nn::add(out.log_f0, base_log_f0);
  }
  out.voiced_logit = nn::slice_cols(ph, 1, 1);
  out.energy = energy_out_(run_stack(frame_hidden, energy_convs_, energy_norms_));

  Tensor pitch_in, energy_in;
  if (targets) {
    require(targets->log_f0.rows() == t && targets->voiced.rows() == t &&
                targets->energy.rows() == t,
            "predict_frame_variance: target length mismatch");
    Matrix pin(t, 2);
    pin.col(0) = (targets->log_f0.col(0).array() - kLogF0Center).matrix();
    pin.col(0) = pin.col(0).cwiseProduct(targets->voiced.col(0));
    pin.col(1) = targets->voiced.col(0);
    pitch_in = nn::constant(std::move(pin));
    energy_in = nn::constant(targets->energy);
  } else {
    Tensor voiced = nn::detach(nn::sigmoid(out.voiced_logit));
    Matrix v = (voiced.value().array() > 0.5f).cast<Real>().matrix();
    Matrix pin(t, 2);
    pin.col(0) = ((out.log_f0.value().col(0).array() - kLogF0Center) *
                  v.col(0).array()).matrix();
    pin.col(1) = v.col(0);
    pitch_in = nn::constant(std::move(pin));
    energy_in = nn::detach(out.energy);
  }
  out.embedding = nn::add(pitch_embed_(pitch_in), energy_embed_(energy_in));
  return out;
}

PriorDistribution PriorEncoder::frame_prior(const Tensor& frame_hidden,
                                            const Tensor& mask) const {
  require(frame_hidden.cols() == config_.hidden, "frame_prior: width mismatch");
  require(mask.rows() == frame_hidden.rows(), "frame_prior: mask length mismatch");
  Tensor h = nn::mul_col(frame_hidden, mask);
  for (size_t i = 0; i < frame_convs_.size(); ++i)
    h = nn::mul_col(frame_norms_[i](nn::add(h, nn::relu(frame_convs_[i](h)))), mask);
  Tensor stats = nn::mul_col(frame_proj_(h), mask);
  PriorDistribution out;
  out.mean = nn::slice_cols(stats, 0, config_.hidden);
  out.log_var = nn::slice_cols(stats, config_.hidden, config_.hidden);
  return out;
}

Matrix note_log_f0(const score::MusicalScore& score) {
  const Eigen::Index p = static_cast<Eigen::Index>(score.size());
  double sum = 0.0;
  int pitched = 0;
  for (int id : score.note_pitch_ids)
    if (id > 0) {
      sum += std::log(dsp::midi_to_hz<double>(id));
      ++pitched;
    }
  const double rest = pitched ? sum / pitched : std::log(dsp::midi_to_hz<double>(60));
  Matrix out(p, 1);
  for (Eigen::Index i = 0; i < p; ++i) {
    const int id = score.note_pitch_ids[i];
    out(i, 0) = static_cast<Real>(id > 0 ? std::log(dsp::midi_to_hz<double>(id)) : rest);
  }
  return out;
}

}  // namespace svs::prior
