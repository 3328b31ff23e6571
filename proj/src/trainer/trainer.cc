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

#include "svs/trainer/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <glog/logging.h>
#include <nlohmann/json.hpp>

#include "svs/dsp/pitch.h"
#include "svs/eval/metrics.h"

namespace svs::trainer {

using nn::Tensor;

SvsModel::SvsModel(const TrainConfig& cfg, uint64_t seed)
    : config(cfg), mel(cfg.features) {
  cfg.validate();
  Rng rng(seed);
  posterior = posterior::PosteriorEncoder(store, rng, cfg.posterior);
  phoneme_predictor =
      posterior::PhonemePredictor(store, rng, cfg.phoneme_predictor);
  speaker_encoder = prior::SpeakerEncoder(store, rng, cfg.speaker_encoder);
  prior = prior::PriorEncoder(store, rng, cfg.prior);
  flow = flow::FlowStack(store, rng, cfg.flow);
  decoder = vocoder::Generator(store, rng, cfg.decoder);
  discriminator = vocoder::Discriminator(store, rng, cfg.discriminator);
}

std::set<std::string> trainable_groups(score::Stage stage) {
  if (stage == score::Stage::kPretrain)
    return {"posterior", "phoneme_predictor", "speaker_encoder", "prior", "flow",
            "decoder"};
  return {"posterior", "prior", "flow", "decoder", "duration_regulator",
          "pitch_predictor", "energy_predictor"};
}

std::string LossReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["stage"] = score::stage_name(stage);
  for (const auto& [k, v] : terms) j[k] = v;
  j["disc"] = disc_loss;
  j["total"] = total;
  j["grad_norm"] = grad_norm;
  j["lr"] = lr;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

Matrix posterior_input(const MatrixT<double>& linear_spec) {
  return linear_spec.array().log1p().matrix().cast<Real>();
}

namespace {

struct VocoderTerms {
  Tensor mel, feature_matching, adversarial, disc;
};

Matrix column(const Eigen::VectorXd& v) {
  return v.cast<Real>();
}

Matrix f0_column(const dsp::F0Contour& f0) {
  Matrix m(f0.size(), 1);
  for (Eigen::Index t = 0; t < f0.size(); ++t)
    m(t, 0) = f0.voiced[t] ? static_cast<Real>(f0.hz(t)) : Real(0);
  return m;
}

VocoderTerms vocoder_terms(const SvsModel& model, const Tensor& z,
                           const prior::SpeakerEmbedding& speaker,
                           const Matrix& f0, const score::Batch& batch,
                           size_t item, int segment_frames, Rng& rng) {
  const int hop = model.config.features.hop;
  const vocoder::Slice s = vocoder::random_slice(z.rows(), segment_frames, hop, rng);
  Tensor zs = nn::slice_rows(z, s.frame_start, s.frames);
  Tensor fake = model.decoder.decode(zs, speaker,
                                     nn::constant(f0.middleRows(s.frame_start, s.frames)));
  Matrix real_m = batch.waveforms.row(static_cast<Eigen::Index>(item))
                      .segment(s.sample_start, s.samples)
                      .transpose()
                      .cast<Real>();
  Tensor real = nn::constant(std::move(real_m));

  VocoderTerms out;
  vocoder::DiscriminatorOutput real_out = model.discriminator.discriminate(real);
  vocoder::DiscriminatorOutput fake_det =
      model.discriminator.discriminate(nn::detach(fake));
  out.disc = vocoder::discriminator_loss(real_out.scores, fake_det.scores);
  vocoder::DiscriminatorOutput fake_out = model.discriminator.discriminate(fake);
  out.adversarial = vocoder::generator_adversarial_loss(fake_out.scores);
  out.feature_matching =
      vocoder::feature_matching_loss(real_out.features, fake_out.features);
  out.mel = vocoder::mel_l1_loss(model.mel, real, fake);
  return out;
}

void add_term(std::map<std::string, double>& terms, const std::string& key,
              double value, double scale) {
  terms[key] += value * scale;
}

}  // namespace

Trainer::Trainer(const TrainConfig& config, score::Stage stage)
    : config_(config),
      stage_(stage),
      model_(std::make_unique<SvsModel>(config, config.seed)),
      rng_(config.seed ^ (stage == score::Stage::kPretrain ? 0x5eedULL : 0xf17eULL)) {
  for (const auto& w : config.validate()) LOG(WARNING) << "config: " << w;
  rebuild_optimizers();
}

void Trainer::rebuild_optimizers() {
  gen_opt_ = std::make_unique<nn::AdamW>(
      model_->store.tensors_in_groups(trainable_groups(stage_)), config_.optimizer);
  disc_opt_ = std::make_unique<nn::AdamW>(
      model_->store.tensors_in_groups({"discriminator"}), config_.optimizer);
}

void Trainer::set_discriminator_grad(bool enabled) {
  for (auto& t : model_->store.tensors_in_groups({"discriminator"}))
    t.node()->requires_grad = enabled;
}

void Trainer::set_speaker_condition(const Matrix& vec) {
  require(vec.rows() == 1 && vec.cols() == prior::kSpeakerDim,
          "speaker condition must be [1 x 192]");
  require(vec.allFinite(), "speaker condition is not finite");
  speaker_ = vec;
}

void Trainer::compute_speaker_condition(
    const std::vector<score::PreparedUtterance>& corpus) {
  std::vector<Matrix> mels;
  for (const auto& u : corpus) mels.push_back(u.features.mel_spec.cast<Real>());
  set_speaker_condition(
      prior::average_speaker_embedding(model_->speaker_encoder, mels).vec.value());
}

LossReport Trainer::finish_step(LossReport report, double) {
  const double lr = step_lr(config_, step_);
  report.grad_norm = gen_opt_->step(lr);
  disc_opt_->step(lr);
  report.stage = stage_;
  report.step = step_;
  report.lr = lr;
  report.total = 0.0;
  for (const auto& [k, w] : report.weights) report.total += w * report.terms.at(k);
  ++step_;
  return report;
}

LossReport Trainer::pretrain_step(const score::Batch& batch) {
  require(stage_ == score::Stage::kPretrain,
          "wrong stage: trainer is configured for fine-tuning");
  require(batch.stage == score::Stage::kPretrain,
          "wrong stage: pretrain_step received an annotated fine-tuning batch");
  require(batch.size() > 0, "pretrain_step: empty batch");
  SvsModel& m = *model_;
  const LossWeights& w = config_.weights;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  m.store.zero_grad();

  LossReport report;
  report.weights = {{"ctc", w.ctc},
                    {"kl", w.kl},
                    {"mel", w.mel},
                    {"feature_matching", w.feature_matching},
                    {"adversarial", w.adversarial}};
  for (size_t i = 0; i < batch.size(); ++i) {
    const score::PreparedUtterance& utt = *batch.items[i];
    const dsp::FeatureBundle& f = utt.features;
    const Eigen::Index frames = f.frames();
    Tensor mask = nn::ones_mask(frames);
    Tensor spec = nn::constant(posterior_input(f.linear_spec));
    Tensor mel = nn::constant(f.mel_spec.cast<Real>());
    const Matrix f0 = f0_column(f.f0);

    posterior::LatentPosterior q = m.posterior.encode(spec, mask, rng_);
    posterior::PhonemeProbMatrix pp = m.phoneme_predictor.predict_phonemes(q.z, mask);
    const auto& target = utt.meta.phoneme_sequence;
    Tensor ctc = nn::scale(posterior::ctc_loss(pp.log_probs, target, frames),
                           1.0f / static_cast<Real>(std::max<size_t>(1, target.size())));

    prior::SpeakerEmbedding spk = m.speaker_encoder.speaker_encode(mel);
    std::vector<int> midi(static_cast<size_t>(frames));
    for (Eigen::Index t = 0; t < frames; ++t)
      midi[t] = dsp::hz_to_midi(static_cast<double>(f0(t, 0)));
    Tensor emb = nn::add(posterior::probs_to_embeddings(pp.probs, m.prior.phoneme_table()),
                         m.prior.pitch_embedding(midi));
    Tensor hidden = m.prior.encode_frames(emb, mask, spk);
    prior::PriorDistribution p = m.prior.frame_prior(hidden, mask);
    Tensor cond = nn::broadcast_rows(spk.vec, frames);
    flow::KlTerms kl =
        flow::bidirectional_kl(q, p, m.flow, mask, cond, rng_,
                               config_.reverse_kl_weight, config_.reverse_kl_temperature);

    VocoderTerms voc = vocoder_terms(m, q.z, {spk.vec, {}}, f0, batch, i,
                                     config_.segment_frames, rng_);

    Tensor total = nn::scale(ctc, static_cast<Real>(w.ctc));
    total = nn::add(total, nn::scale(kl.total, static_cast<Real>(w.kl)));
    total = nn::add(total, nn::scale(voc.mel, static_cast<Real>(w.mel)));
    total = nn::add(total, nn::scale(voc.feature_matching,
                                     static_cast<Real>(w.feature_matching)));
    total = nn::add(total, nn::scale(voc.adversarial, static_cast<Real>(w.adversarial)));

    set_discriminator_grad(true);
    nn::backward(nn::scale(voc.disc, static_cast<Real>(inv_b)));
    set_discriminator_grad(false);
    nn::backward(nn::scale(total, static_cast<Real>(inv_b)));
    set_discriminator_grad(true);

    add_term(report.terms, "ctc", ctc.item(), inv_b);
    add_term(report.terms, "kl", kl.total.item(), inv_b);
    add_term(report.terms, "kl_forward", kl.forward.item(), inv_b);
    add_term(report.terms, "kl_reverse", kl.reverse.item(), inv_b);
    add_term(report.terms, "mel", voc.mel.item(), inv_b);
    add_term(report.terms, "feature_matching", voc.feature_matching.item(), inv_b);
    add_term(report.terms, "adversarial", voc.adversarial.item(), inv_b);
    report.disc_loss += voc.disc.item() * inv_b;
  }
  return finish_step(std::move(report), static_cast<double>(batch.size()));
}

LossReport Trainer::finetune_step(const score::Batch& batch) {
  require(stage_ == score::Stage::kFinetune,
          "wrong stage: trainer is configured for pre-training");
  require(batch.stage == score::Stage::kFinetune,
          "wrong stage: finetune_step needs score annotations");
  require(speaker_.has_value(), "finetune_step: no fixed speaker condition loaded");
  require(batch.size() > 0, "finetune_step: empty batch");
  SvsModel& m = *model_;
  const LossWeights& w = config_.weights;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  m.store.zero_grad();

  LossReport report;
  report.weights = {{"kl", w.kl},
                    {"mel", w.mel},
                    {"feature_matching", w.feature_matching},
                    {"adversarial", w.adversarial},
                    {"duration", w.duration},
                    {"pitch", w.pitch},
                    {"energy", w.energy}};
  const prior::SpeakerEmbedding spk{nn::constant(*speaker_), {}};
  for (size_t i = 0; i < batch.size(); ++i) {
    const score::PreparedUtterance& utt = *batch.items[i];
    require(utt.meta.score.has_value(),
            "finetune_step: missing score annotations for " + utt.meta.utt_id);
    const score::MusicalScore& sc = *utt.meta.score;
    const dsp::FeatureBundle& f = utt.features;
    const Eigen::Index frames = f.frames();
    require(sc.total_frames() == frames,
            "finetune_step: score of " + utt.meta.utt_id + " spans " +
                std::to_string(sc.total_frames()) + " frames, audio has " +
                std::to_string(frames));
    Tensor mask = nn::ones_mask(frames);
    Tensor spec = nn::constant(posterior_input(f.linear_spec));
    const Matrix f0 = f0_column(f.f0);

    posterior::LatentPosterior q = m.posterior.encode(spec, mask, rng_);
    Tensor hidden = m.prior.encode_score(sc, spk);
    prior::DurationRatios dur = m.prior.predict_duration(
        nn::detach(hidden), sc.note_lengths_per_phoneme(), sc.note_index);
    Matrix gt_log_d(static_cast<Eigen::Index>(sc.size()), 1);
    for (size_t k = 0; k < sc.size(); ++k)
      gt_log_d(k, 0) = std::log(static_cast<Real>(std::max(1, sc.note_durations_frames[k])));
    Tensor dur_loss = nn::mean(nn::abs(nn::sub(nn::log(dur.durations_frames),
                                               nn::constant(std::move(gt_log_d)))));

    prior::UpsampleResult up = prior::differentiable_upsample(
        hidden, dur.durations_frames, frames, config_.prior.temperature);
    Tensor base = nn::matmul(up.projection, nn::constant(prior::note_log_f0(sc)));
    prior::VarianceTargets targets;
    targets.log_f0 = Matrix::Zero(frames, 1);
    targets.voiced = Matrix::Zero(frames, 1);
    for (Eigen::Index t = 0; t < frames; ++t)
      if (f0(t, 0) > 0) {
        targets.log_f0(t, 0) = std::log(f0(t, 0));
        targets.voiced(t, 0) = 1;
      }
    targets.energy =
        (f.energy.array() + prior::kLogEnergyFloor).log().matrix().cast<Real>();
    prior::FrameVariance var = m.prior.predict_frame_variance(up.frame_hidden, base,
                                                              &targets);
    const Real voiced_count = std::max<Real>(1, targets.voiced.sum());
    Tensor voiced = nn::constant(targets.voiced);
    Tensor f0_l1 = nn::scale(
        nn::sum(nn::mul(nn::abs(nn::sub(var.log_f0, nn::constant(targets.log_f0))),
                        voiced)),
        1.0f / voiced_count);
    Tensor bce = nn::mean(nn::sub(nn::softplus(var.voiced_logit),
                                  nn::mul(voiced, var.voiced_logit)));
    Tensor pitch_loss = nn::add(f0_l1, bce);
    Tensor energy_loss =
        nn::mean(nn::abs(nn::sub(var.energy, nn::constant(targets.energy))));

    Tensor frame_hidden = nn::add(up.frame_hidden, var.embedding);
    prior::PriorDistribution p = m.prior.frame_prior(frame_hidden, mask);
    Tensor cond = nn::broadcast_rows(spk.vec, frames);
    flow::KlTerms kl =
        flow::bidirectional_kl(q, p, m.flow, mask, cond, rng_,
                               config_.reverse_kl_weight, config_.reverse_kl_temperature);
    VocoderTerms voc =
        vocoder_terms(m, q.z, spk, f0, batch, i, config_.segment_frames, rng_);

    Tensor total = nn::scale(kl.total, static_cast<Real>(w.kl));
    total = nn::add(total, nn::scale(voc.mel, static_cast<Real>(w.mel)));
    total = nn::add(total, nn::scale(voc.feature_matching,
                                     static_cast<Real>(w.feature_matching)));
    total = nn::add(total, nn::scale(voc.adversarial, static_cast<Real>(w.adversarial)));
    total = nn::add(total, nn::scale(dur_loss, static_cast<Real>(w.duration)));
    total = nn::add(total, nn::scale(pitch_loss, static_cast<Real>(w.pitch)));
    total = nn::add(total, nn::scale(energy_loss, static_cast<Real>(w.energy)));

    set_discriminator_grad(true);
    nn::backward(nn::scale(voc.disc, static_cast<Real>(inv_b)));
    set_discriminator_grad(false);
    nn::backward(nn::scale(total, static_cast<Real>(inv_b)));
    set_discriminator_grad(true);

    add_term(report.terms, "kl", kl.total.item(), inv_b);
    add_term(report.terms, "kl_forward", kl.forward.item(), inv_b);
    add_term(report.terms, "kl_reverse", kl.reverse.item(), inv_b);
    add_term(report.terms, "mel", voc.mel.item(), inv_b);
    add_term(report.terms, "feature_matching", voc.feature_matching.item(), inv_b);
    add_term(report.terms, "adversarial", voc.adversarial.item(), inv_b);
    add_term(report.terms, "duration", dur_loss.item(), inv_b);
    add_term(report.terms, "pitch", pitch_loss.item(), inv_b);
    add_term(report.terms, "pitch_l1", f0_l1.item(), inv_b);
    add_term(report.terms, "energy", energy_loss.item(), inv_b);
    report.disc_loss += voc.disc.item() * inv_b;
  }
  return finish_step(std::move(report), static_cast<double>(batch.size()));
}

LossReport Trainer::train_step(const score::Batch& batch) {
  return stage_ == score::Stage::kPretrain ? pretrain_step(batch)
                                           : finetune_step(batch);
}

Checkpoint Trainer::checkpoint() const {
  const std::string cfg = config_to_json(config_).dump();
  if (stage_ == score::Stage::kPretrain)
    return make_checkpoint(model_->store, stage_, step_, cfg, kFinetuneOnlyGroups);
  Checkpoint c = make_checkpoint(model_->store, stage_, step_, cfg);
  if (speaker_) c.arrays["speaker_condition"] = *speaker_;
  return c;
}

void Trainer::restore(const Checkpoint& ckpt) {
  require(ckpt.stage == stage_, std::string("restore: checkpoint stage is ") +
                                    score::stage_name(ckpt.stage));
  restore_parameters(ckpt, model_->store,
                     stage_ == score::Stage::kPretrain ? kFinetuneOnlyGroups
                                                       : std::set<std::string>{});
  step_ = ckpt.step;
  auto it = ckpt.arrays.find("speaker_condition");
  if (it != ckpt.arrays.end()) set_speaker_condition(it->second);
}

TransferReport Trainer::load_pretrained(const Checkpoint& ckpt) {
  TransferReport report = trainer::load_pretrained(ckpt, model_->store);
  rebuild_optimizers();
  step_ = 0;
  return report;
}

dsp::F0Contour score_f0(const score::MusicalScore& score) {
  Eigen::VectorXd hz = Eigen::VectorXd::Zero(score.total_frames());
  Eigen::Index t = 0;
  for (size_t i = 0; i < score.size(); ++i) {
    const int id = score.note_pitch_ids[i];
    const double v = id > 0 ? dsp::midi_to_hz<double>(id) : 0.0;
    hz.segment(t, score.note_durations_frames[i]).setConstant(v);
    t += score.note_durations_frames[i];
  }
  return dsp::F0Contour::from_hz(hz);
}

SynthesisResult synthesize(const score::MusicalScore& score, const SvsModel& model,
                           const Matrix& speaker, double noise_scale,
                           uint64_t seed) {
  nn::NoGradGuard no_grad;
  Rng rng(seed);
  const prior::SpeakerEmbedding spk{nn::constant(speaker), {}};
  Tensor hidden = model.prior.encode_score(score, spk);
  prior::DurationRatios dur = model.prior.predict_duration(
      hidden, score.note_lengths_per_phoneme(), score.note_index);
  const double total = dur.durations_frames.value().cast<double>().sum();
  const Eigen::Index frames = std::max<Eigen::Index>(1, std::llround(total));
  prior::UpsampleResult up = prior::differentiable_upsample(
      hidden, dur.durations_frames, frames, model.config.prior.temperature);
  Tensor base = nn::matmul(up.projection, nn::constant(prior::note_log_f0(score)));
  prior::FrameVariance var = model.prior.predict_frame_variance(up.frame_hidden, base);

  Eigen::VectorXd hz(frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const bool voiced = var.voiced_logit.value()(t, 0) > 0;
    hz(t) = voiced ? std::exp(static_cast<double>(var.log_f0.value()(t, 0))) : 0.0;
  }
  Tensor mask = nn::ones_mask(frames);
  prior::PriorDistribution p =
      model.prior.frame_prior(nn::add(up.frame_hidden, var.embedding), mask);
  Matrix eps = rng.normal_matrix<Real>(frames, p.mean.cols(), noise_scale);
  Tensor zp = nn::add(p.mean, nn::mul(nn::exp(nn::scale(p.log_var, 0.5f)),
                                      nn::constant(std::move(eps))));
  Tensor cond = nn::broadcast_rows(spk.vec, frames);
  Tensor z = model.flow.inverse(zp, mask, cond).z;
  Tensor wave = model.decoder.decode(z, spk, nn::constant(hz.cast<Real>()));

  SynthesisResult out;
  out.frames = frames;
  out.audio.sample_rate = model.config.features.sample_rate;
  out.audio.samples = wave.value().col(0).cast<double>();
  out.f0 = dsp::F0Contour::from_hz(hz);
  const Matrix& d = dur.durations_frames.value();
  out.durations.assign(d.data(), d.data() + d.size());
  return out;
}

SynthesisResult synthesize(const score::MusicalScore& score, const Checkpoint& ckpt,
                           uint64_t seed) {
  require(ckpt.stage == score::Stage::kFinetune,
          "synthesize: no duration model in a pretrain checkpoint");
  const TrainConfig config = config_from_json(nlohmann::json::parse(ckpt.config_json));
  SvsModel model(config, config.seed);
  restore_parameters(ckpt, model.store);
  auto it = ckpt.arrays.find("speaker_condition");
  require(it != ckpt.arrays.end(), "synthesize: checkpoint has no speaker condition");
  return synthesize(score, model, it->second, config.noise_scale, seed);
}

RunResult run_stage(const TrainConfig& config, score::Stage stage,
                    const std::vector<score::PreparedUtterance>& corpus,
                    const RunOptions& options) {
  require(!corpus.empty(), "run_stage: empty corpus");
  for (const auto& u : corpus)
    require(u.meta.stage() == stage,
            std::string("wrong stage: corpus entry ") + u.meta.utt_id +
                (stage == score::Stage::kPretrain
                     ? " carries a score annotation"
                     : " has no score annotation"));
  std::filesystem::create_directories(options.out_dir);
  Trainer trainer(config, stage);
  if (stage == score::Stage::kFinetune) {
    if (options.init) {
      const TransferReport report = trainer.load_pretrained(load_checkpoint(*options.init));
      nlohmann::ordered_json j;
      j["transferred"] = report.transferred.size();
      j["freshly_initialized"] = report.freshly_initialized;
      j["ignored"] = report.ignored;
      std::ofstream(options.out_dir / "transfer.json") << j.dump(2) << "\n";
      LOG(INFO) << "transferred " << report.transferred.size()
                << " tensors; fresh groups " << j["freshly_initialized"].dump();
    } else {
      LOG(WARNING) << "fine-tuning without a pretrained checkpoint";
    }
    trainer.compute_speaker_condition(corpus);
  }

  const int steps = options.steps.value_or(
      stage == score::Stage::kPretrain ? config.pretrain_steps : config.finetune_steps);
  const size_t batch_size =
      std::min(static_cast<size_t>(config.batch_size), corpus.size());
  Rng order_rng(config.seed + 17);
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = order.size();

  RunResult result;
  result.loss_log = options.out_dir / "losses.jsonl";
  std::ofstream log(result.loss_log, std::ios::app);
  require(log.good(), "cannot open loss log " + result.loss_log.string());

  for (int s = 0; s < steps; ++s) {
    std::vector<const score::PreparedUtterance*> items;
    while (items.size() < batch_size) {
      if (cursor == order.size()) {
        for (size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1],
                    order[static_cast<size_t>(order_rng.uniform_int(0, i - 1))]);
        cursor = 0;
      }
      items.push_back(&corpus[order[cursor++]]);
    }
    const score::Batch batch = score::build_batch(items);
    LossReport report = trainer.train_step(batch);
    if (config.log_every > 0 && (s % config.log_every == 0 || s + 1 == steps)) {
      log << report.to_json_line() << "\n";
      log.flush();
      VLOG(1) << report.to_json_line();
    }
    if (s % 100 == 0 || s + 1 == steps)
      LOG(INFO) << score::stage_name(stage) << " step " << report.step
                << " total " << report.total << " lr " << report.lr;
    result.reports.push_back(std::move(report));
    if (config.checkpoint_every > 0 && (s + 1) % config.checkpoint_every == 0)
      save_checkpoint(options.out_dir / ("checkpoint_" + std::to_string(s + 1) + ".svs"),
                      trainer.checkpoint());
    if (stage == score::Stage::kFinetune && config.validate_every > 0 &&
        (s + 1) % config.validate_every == 0) {
      const auto& held = corpus.front();
      SynthesisResult syn = synthesize(*held.meta.score, trainer.model(),
                                       *trainer.speaker_condition(),
                                       config.noise_scale, config.seed);
      eval::EvalUtterance e;
      e.utt_id = held.meta.utt_id;
      e.ref_f0 = score_f0(*held.meta.score);
      e.pred_f0 = dsp::estimate_f0(syn.audio, config.features);
      const Eigen::Index n = std::min(e.ref_f0.size(), e.pred_f0.size());
      e.ref_f0 = dsp::F0Contour::from_hz(e.ref_f0.hz.head(n));
      e.pred_f0 = dsp::F0Contour::from_hz(e.pred_f0.hz.head(n));
      for (int d : held.meta.score->note_durations_frames) e.ref_durations.push_back(d);
      e.pred_durations = syn.durations;
      LOG(INFO) << "validation step " << s + 1 << " "
                << eval::report_line(eval::compute_report({e}));
    }
  }
  result.checkpoint = options.out_dir / "checkpoint.svs";
  save_checkpoint(result.checkpoint, trainer.checkpoint());
  return result;
}

}  // namespace svs::trainer
