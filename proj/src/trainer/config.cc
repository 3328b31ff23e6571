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

#include "svs/trainer/config.h"

#include <cmath>
#include <fstream>

namespace svs::trainer {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  require(j.at(key).is_object(), std::string("config: section '") + key +
                                     "' must be an object");
  return j.at(key);
}

}  // namespace

std::vector<std::string> TrainConfig::validate() const {
  require(lr_decay > 0.0 && lr_decay <= 1.0, "config: lr decay must lie in (0, 1]");
  require(learning_rate > 0.0, "config: learning rate must be positive");
  require(batch_size > 0, "config: batch size must be positive");
  require(pretrain_steps >= 0 && finetune_steps >= 0,
          "config: step counts must be non-negative");
  require(segment_frames > 0, "config: segment frames must be positive");
  require(reverse_kl_weight >= 0.0 && reverse_kl_weight <= 1.0,
          "config: reverse KL weight must lie in [0, 1]");
  require(features.hop == decoder.hop && features.sample_rate == decoder.sample_rate,
          "config: decoder hop and sample rate must match the features");
  require(posterior.in_channels == features.linear_bins(),
          "config: posterior input must equal n_fft / 2 + 1");
  require(speaker_encoder.n_mels == features.n_mels,
          "config: speaker encoder mel count must match the features");
  require(prior.hidden == posterior.latent && flow.channels == posterior.latent &&
              decoder.in_channels == posterior.latent &&
              phoneme_predictor.channels == posterior.latent,
          "config: latent widths must agree across modules");
  require(prior.phoneme_classes == phoneme_predictor.classes,
          "config: phoneme class counts must agree");
  decoder.validate();
  std::vector<std::string> warnings;
  if (reverse_kl_weight > 0.5)
    warnings.push_back("reverse KL weight " + std::to_string(reverse_kl_weight) +
                       " > 0.5 is prone to gradient explosion");
  return warnings;
}

ordered_json config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["optimizer"] = {{"learning_rate", c.learning_rate},
                    {"lr_decay", c.lr_decay},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.eps},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"max_grad_norm", c.optimizer.max_grad_norm}};
  j["training"] = {{"batch_size", c.batch_size},
                   {"pretrain_steps", c.pretrain_steps},
                   {"finetune_steps", c.finetune_steps},
                   {"segment_frames", c.segment_frames},
                   {"reverse_kl_weight", c.reverse_kl_weight},
                   {"reverse_kl_temperature", c.reverse_kl_temperature},
                   {"noise_scale", c.noise_scale},
                   {"log_every", c.log_every},
                   {"checkpoint_every", c.checkpoint_every},
                   {"validate_every", c.validate_every}};
  j["loss_weights"] = {{"mel", c.weights.mel},
                       {"feature_matching", c.weights.feature_matching},
                       {"adversarial", c.weights.adversarial},
                       {"kl", c.weights.kl},
                       {"ctc", c.weights.ctc},
                       {"duration", c.weights.duration},
                       {"pitch", c.weights.pitch},
                       {"energy", c.weights.energy}};
  j["data"] = {{"lexicon", c.lexicon_path}, {"syllables", c.syllables_path}};
  const auto& f = c.features;
  j["features"] = {{"sample_rate", f.sample_rate}, {"n_fft", f.n_fft},
                   {"hop", f.hop},           {"n_mels", f.n_mels},
                   {"fmin", f.fmin},         {"fmax", f.fmax},
                   {"f0_min", f.f0_min},     {"f0_max", f.f0_max},
                   {"voicing_rms", f.voicing_rms},
                   {"voicing_periodicity", f.voicing_periodicity}};
  const auto& p = c.posterior;
  j["posterior"] = {{"in_channels", p.in_channels}, {"hidden", p.hidden},
                    {"latent", p.latent},           {"kernel", p.kernel},
                    {"layers", p.layers},           {"dilation_rate", p.dilation_rate}};
  const auto& pp = c.phoneme_predictor;
  j["phoneme_predictor"] = {{"channels", pp.channels}, {"classes", pp.classes},
                            {"layers", pp.layers},     {"heads", pp.heads},
                            {"kernel", pp.kernel},     {"ffn_channels", pp.ffn_channels}};
  const auto& s = c.speaker_encoder;
  j["speaker_encoder"] = {{"n_mels", s.n_mels},
                          {"channels", s.channels},
                          {"embedding", s.embedding},
                          {"attention_channels", s.attention_channels},
                          {"dilations", s.dilations},
                          {"min_frames", s.min_frames}};
  const auto& pr = c.prior;
  j["prior"] = {{"hidden", pr.hidden},
                {"phoneme_classes", pr.phoneme_classes},
                {"pitch_ids", pr.pitch_ids},
                {"duration_ids", pr.duration_ids},
                {"note_layers", pr.note_layers},
                {"ffn_channels", pr.fft.ffn_channels},
                {"heads", pr.fft.heads},
                {"fft_kernel", pr.fft.kernel},
                {"frame_layers", pr.frame_layers},
                {"frame_kernel", pr.frame_kernel},
                {"duration_layers", pr.duration_layers},
                {"duration_kernel", pr.duration_kernel},
                {"variance_layers", pr.variance_layers},
                {"variance_kernel", pr.variance_kernel},
                {"temperature", pr.temperature}};
  const auto& fl = c.flow;
  j["flow"] = {{"channels", fl.channels},
               {"hidden", fl.hidden},
               {"kernel", fl.kernel},
               {"couplings", fl.couplings},
               {"coupling_layers", fl.coupling_layers},
               {"cond_channels", fl.cond_channels}};
  const auto& d = c.decoder;
  j["decoder"] = {{"initial_channels", d.initial_channels},
                  {"upsample_factors", d.upsample_factors},
                  {"resblock_kernels", d.resblock_kernels},
                  {"resblock_dilations", d.resblock_dilations},
                  {"harmonics", d.harmonics}};
  const auto& ds = c.discriminator;
  j["discriminator"] = {{"scale_pools", ds.scale_pools},
                        {"periods", ds.periods},
                        {"channels", ds.channels},
                        {"min_samples", ds.min_samples}};
  return j;
}

TrainConfig config_from_json(const json& j) {
  require(j.is_object(), "config: top level must be an object");
  TrainConfig c;
  read(j, "seed", c.seed);
  const json& o = section(j, "optimizer");
  read(o, "learning_rate", c.learning_rate);
  read(o, "lr_decay", c.lr_decay);
  read(o, "beta1", c.optimizer.beta1);
  read(o, "beta2", c.optimizer.beta2);
  read(o, "eps", c.optimizer.eps);
  read(o, "weight_decay", c.optimizer.weight_decay);
  read(o, "max_grad_norm", c.optimizer.max_grad_norm);
  const json& t = section(j, "training");
  read(t, "batch_size", c.batch_size);
  read(t, "pretrain_steps", c.pretrain_steps);
  read(t, "finetune_steps", c.finetune_steps);
  read(t, "segment_frames", c.segment_frames);
  read(t, "reverse_kl_weight", c.reverse_kl_weight);
  read(t, "reverse_kl_temperature", c.reverse_kl_temperature);
  read(t, "noise_scale", c.noise_scale);
  read(t, "log_every", c.log_every);
  read(t, "checkpoint_every", c.checkpoint_every);
  read(t, "validate_every", c.validate_every);
  const json& w = section(j, "loss_weights");
  read(w, "mel", c.weights.mel);
  read(w, "feature_matching", c.weights.feature_matching);
  read(w, "adversarial", c.weights.adversarial);
  read(w, "kl", c.weights.kl);
  read(w, "ctc", c.weights.ctc);
  read(w, "duration", c.weights.duration);
  read(w, "pitch", c.weights.pitch);
  read(w, "energy", c.weights.energy);
  const json& data = section(j, "data");
  read(data, "lexicon", c.lexicon_path);
  read(data, "syllables", c.syllables_path);
  const json& f = section(j, "features");
  read(f, "sample_rate", c.features.sample_rate);
  read(f, "n_fft", c.features.n_fft);
  read(f, "hop", c.features.hop);
  read(f, "n_mels", c.features.n_mels);
  read(f, "fmin", c.features.fmin);
  read(f, "fmax", c.features.fmax);
  read(f, "f0_min", c.features.f0_min);
  read(f, "f0_max", c.features.f0_max);
  read(f, "voicing_rms", c.features.voicing_rms);
  read(f, "voicing_periodicity", c.features.voicing_periodicity);
  const json& p = section(j, "posterior");
  read(p, "in_channels", c.posterior.in_channels);
  read(p, "hidden", c.posterior.hidden);
  read(p, "latent", c.posterior.latent);
  read(p, "kernel", c.posterior.kernel);
  read(p, "layers", c.posterior.layers);
  read(p, "dilation_rate", c.posterior.dilation_rate);
  const json& pp = section(j, "phoneme_predictor");
  read(pp, "channels", c.phoneme_predictor.channels);
  read(pp, "classes", c.phoneme_predictor.classes);
  read(pp, "layers", c.phoneme_predictor.layers);
  read(pp, "heads", c.phoneme_predictor.heads);
  read(pp, "kernel", c.phoneme_predictor.kernel);
  read(pp, "ffn_channels", c.phoneme_predictor.ffn_channels);
  const json& s = section(j, "speaker_encoder");
  read(s, "n_mels", c.speaker_encoder.n_mels);
  read(s, "channels", c.speaker_encoder.channels);
  read(s, "embedding", c.speaker_encoder.embedding);
  read(s, "attention_channels", c.speaker_encoder.attention_channels);
  read(s, "dilations", c.speaker_encoder.dilations);
  read(s, "min_frames", c.speaker_encoder.min_frames);
  const json& pr = section(j, "prior");
  read(pr, "hidden", c.prior.hidden);
  read(pr, "phoneme_classes", c.prior.phoneme_classes);
  read(pr, "pitch_ids", c.prior.pitch_ids);
  read(pr, "duration_ids", c.prior.duration_ids);
  read(pr, "note_layers", c.prior.note_layers);
  read(pr, "ffn_channels", c.prior.fft.ffn_channels);
  read(pr, "heads", c.prior.fft.heads);
  read(pr, "fft_kernel", c.prior.fft.kernel);
  read(pr, "frame_layers", c.prior.frame_layers);
  read(pr, "frame_kernel", c.prior.frame_kernel);
  read(pr, "duration_layers", c.prior.duration_layers);
  read(pr, "duration_kernel", c.prior.duration_kernel);
  read(pr, "variance_layers", c.prior.variance_layers);
  read(pr, "variance_kernel", c.prior.variance_kernel);
  read(pr, "temperature", c.prior.temperature);
  c.prior.fft.channels = c.prior.hidden;
  const json& fl = section(j, "flow");
  read(fl, "channels", c.flow.channels);
  read(fl, "hidden", c.flow.hidden);
  read(fl, "kernel", c.flow.kernel);
  read(fl, "couplings", c.flow.couplings);
  read(fl, "coupling_layers", c.flow.coupling_layers);
  read(fl, "cond_channels", c.flow.cond_channels);
  const json& d = section(j, "decoder");
  read(d, "initial_channels", c.decoder.initial_channels);
  read(d, "upsample_factors", c.decoder.upsample_factors);
  read(d, "resblock_kernels", c.decoder.resblock_kernels);
  read(d, "resblock_dilations", c.decoder.resblock_dilations);
  read(d, "harmonics", c.decoder.harmonics);
  c.decoder.in_channels = c.posterior.latent;
  c.decoder.hop = c.features.hop;
  c.decoder.sample_rate = c.features.sample_rate;
  const json& ds = section(j, "discriminator");
  read(ds, "scale_pools", c.discriminator.scale_pools);
  read(ds, "periods", c.discriminator.periods);
  read(ds, "channels", c.discriminator.channels);
  read(ds, "min_samples", c.discriminator.min_samples);
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  try {
    TrainConfig config = config_from_json(j);
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
}

double step_lr(long step, double base_lr, double decay) {
  require(step >= 0, "step_lr: negative step " + std::to_string(step));
  return base_lr * std::pow(decay, static_cast<double>(step));
}

double step_lr(const TrainConfig& config, long step) {
  return step_lr(step, config.learning_rate, config.lr_decay);
}

}  // namespace svs::trainer
