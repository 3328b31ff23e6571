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

#include "svs/vocoder/vocoder.h"

#include <cmath>

namespace svs::vocoder {

using nn::Tensor;

namespace {

constexpr Real kSlope = 0.1f;
constexpr Real kAmplitudeBias = -3.0f;

}  // namespace

void DecoderConfig::validate() const {
  int product = 1;
  for (int u : upsample_factors) {
    require(u > 0 && u % 2 == 0, "decoder: upsample factors must be positive and even");
    product *= u;
  }
  require(product == hop, "decoder: upsample factors multiply to " +
                              std::to_string(product) + ", hop is " +
                              std::to_string(hop));
  require(initial_channels >> upsample_factors.size() >= 1,
          "decoder: too few channels for the number of upsample stages");
}

Generator::Generator(nn::ParameterStore& store, Rng& rng,
                     const DecoderConfig& config)
    : config_(config) {
  config.validate();
  const int c0 = config.initial_channels;
  conv_pre_ = nn::Conv1d(store, rng, "decoder.conv_pre", config.in_channels, c0, 7);
  cond_ = nn::Linear(store, rng, "decoder.cond", prior::kSpeakerDim, c0);
  if (config.harmonics > 0) {
    amplitude_ = nn::Linear(store, rng, "decoder.harmonic_amplitude", c0,
                            config.harmonics);
    amplitude_.bias.mutable_value().setConstant(kAmplitudeBias);
  }
  int ch = c0;
  for (size_t i = 0; i < config.upsample_factors.size(); ++i) {
    const std::string name = "decoder.up" + std::to_string(i);
    ups_.emplace_back(store, rng, name, ch, ch / 2, config.upsample_factors[i]);
    ch /= 2;
    std::vector<ResBlock> blocks;
    for (size_t k = 0; k < config.resblock_kernels.size(); ++k) {
      ResBlock rb;
      for (size_t d = 0; d < config.resblock_dilations.size(); ++d)
        rb.convs.emplace_back(store, rng,
                              name + ".res" + std::to_string(k) + ".conv" +
                                  std::to_string(d),
                              ch, ch, config.resblock_kernels[k],
                              config.resblock_dilations[d]);
      blocks.push_back(std::move(rb));
    }
    resblocks_.push_back(std::move(blocks));
  }
  conv_post_ = nn::Conv1d(store, rng, "decoder.conv_post", ch, 1, 7);
}

Tensor Generator::decode(const Tensor& z, const prior::SpeakerEmbedding& speaker,
                         const Tensor& f0_hz) const {
  require(z.rows() >= 1, "decode: empty slice");
  require(z.cols() == config_.in_channels,
          "decode: expected " + std::to_string(config_.in_channels) +
              " latent channels, got " + std::to_string(z.cols()));
  require(speaker.vec.defined() && speaker.vec.cols() == prior::kSpeakerDim,
          "decode: speaker embedding must be [1 x 192]");
  const Eigen::Index frames = z.rows();
  Tensor h = nn::add_row(conv_pre_(z), cond_(speaker.vec));
  Tensor amplitude;
  if (config_.harmonics > 0 && f0_hz.defined())
    amplitude = nn::softplus(amplitude_(h));

  for (size_t i = 0; i < ups_.size(); ++i) {
    h = ups_[i](nn::leaky_relu(h, kSlope));
    Tensor acc;
    for (const auto& rb : resblocks_[i]) {
      Tensor x = h;
      for (const auto& conv : rb.convs)
        x = nn::add(x, conv(nn::leaky_relu(x, kSlope)));
      acc = acc.defined() ? nn::add(acc, x) : x;
    }
    h = nn::scale(acc, 1.0f / static_cast<Real>(resblocks_[i].size()));
  }
  Tensor wave = conv_post_(nn::leaky_relu(h, kSlope));

  if (amplitude.defined()) {
    require(f0_hz.rows() == frames && f0_hz.cols() == 1,
            "decode: f0 must be [t x 1]");
    const Matrix bank = harmonic_bank(f0_hz.value(), config_.hop,
                                      config_.sample_rate, config_.harmonics);
    std::vector<int> owner(static_cast<size_t>(frames * config_.hop));
    for (size_t n = 0; n < owner.size(); ++n)
      owner[n] = static_cast<int>(n / config_.hop);
    Tensor per_sample = nn::gather_rows(amplitude, owner);
    wave = nn::add(wave, nn::sum_cols(nn::mul(per_sample, nn::constant(bank))));
  }
  return nn::tanh(wave);
}

Matrix harmonic_bank(const Matrix& f0_frames, int hop, int sample_rate,
                     int harmonics) {
  const Eigen::Index frames = f0_frames.rows();
  Matrix out = Matrix::Zero(frames * hop, harmonics);
  const double nyquist = 0.5 * sample_rate;
  double phase = 0.0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double f0 = f0_frames(t, 0);
    const double step = 2.0 * M_PI * std::max(f0, 0.0) / sample_rate;
    for (int s = 0; s < hop; ++s) {
      phase += step;
      if (phase > 2.0 * M_PI) phase -= 2.0 * M_PI;
      if (f0 <= 0.0) continue;
      const Eigen::Index n = t * hop + s;
      for (int k = 1; k <= harmonics; ++k) {
        if (k * f0 >= nyquist) break;
        out(n, k - 1) = static_cast<Real>(std::sin(k * phase));
      }
    }
  }
  return out;
}

Discriminator::Stack Discriminator::make_stack(nn::ParameterStore& store,
                                               Rng& rng,
                                               const std::string& name,
                                               int c, bool period) {
  Stack s;
  const int k = period ? 5 : 15;
  const int stride = period ? 3 : 4;
  s.convs.emplace_back(store, rng, name + ".conv0", 1, c, k, 1, period ? stride : 1);
  s.convs.emplace_back(store, rng, name + ".conv1", c, 2 * c, k, 1, stride);
  s.convs.emplace_back(store, rng, name + ".conv2", 2 * c, 4 * c, k, 1, stride);
  s.convs.emplace_back(store, rng, name + ".conv3", 4 * c, 4 * c, 5, 1, 1);
  s.post = nn::Conv1d(store, rng, name + ".post", 4 * c, 1, 3);
  return s;
}

void Discriminator::run_stack(const Stack& s, const Tensor& x,
                              std::vector<Tensor>& feats, Tensor& score) {
  Tensor h = x;
  for (const auto& conv : s.convs) {
    h = nn::leaky_relu(conv(h), kSlope);
    feats.push_back(h);
  }
  score = s.post(h);
  feats.push_back(score);
}

Discriminator::Discriminator(nn::ParameterStore& store, Rng& rng,
                             const DiscriminatorConfig& config)
    : config_(config) {
  for (size_t i = 0; i < config.scale_pools.size(); ++i)
    scales_.push_back(make_stack(store, rng,
                                 "discriminator.scale" + std::to_string(i),
                                 config.channels, false));
  for (size_t i = 0; i < config.periods.size(); ++i)
    periods_.push_back(make_stack(store, rng,
                                  "discriminator.period" + std::to_string(i),
                                  config.channels, true));
}

DiscriminatorOutput Discriminator::discriminate(const Tensor& wave) const {
  require(wave.cols() == 1, "discriminate: expected a mono waveform column");
  require(wave.rows() >= config_.min_samples,
          "discriminate: input too short (" + std::to_string(wave.rows()) +
              " samples, need " + std::to_string(config_.min_samples) + ")");
  DiscriminatorOutput out;
  for (size_t i = 0; i < scales_.size(); ++i) {
    Tensor x = wave;
    for (int p = 1; p < config_.scale_pools[i]; ++p) x = nn::avg_pool_rows(x, 4, 2, 2);
    std::vector<Tensor> feats;
    Tensor score;
    run_stack(scales_[i], x, feats, score);
    out.scores.push_back(score);
    out.features.push_back(std::move(feats));
  }
  for (size_t i = 0; i < periods_.size(); ++i) {
    const int p = config_.periods[i];
    Tensor x = wave;
    const Eigen::Index rem = wave.rows() % p;
    if (rem != 0)
      x = nn::concat_rows({x, nn::constant(Matrix::Zero(p - rem, 1))});
    Tensor grid = nn::reshape(x, x.rows() / p, p);
    std::vector<Tensor> feats;
    std::vector<Tensor> scores;
    for (int j = 0; j < p; ++j) {
      Tensor score;
      run_stack(periods_[i], nn::slice_cols(grid, j, 1), feats, score);
      scores.push_back(score);
    }
    out.scores.push_back(nn::concat_rows(scores));
    out.features.push_back(std::move(feats));
  }
  return out;
}

MelTransform::MelTransform(const dsp::FeatureConfig& cfg) : cfg_(cfg) {
  const int n = cfg.n_fft;
  const int bins = cfg.linear_bins();
  window_ = nn::constant(dsp::hann_window(n).cast<Real>().transpose());
  Matrix c(n, bins), s(n, bins);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < bins; ++k) {
      const double a = 2.0 * M_PI * static_cast<double>((static_cast<int64_t>(i) * k) % n) / n;
      c(i, k) = static_cast<Real>(std::cos(a));
      s(i, k) = static_cast<Real>(std::sin(a));
    }
  cos_ = nn::constant(std::move(c));
  sin_ = nn::constant(std::move(s));
  mel_basis_ = nn::constant(dsp::mel_filterbank(cfg).cast<Real>());
}

Tensor MelTransform::operator()(const Tensor& wave) const {
  Tensor frames = nn::mul_row(nn::frame_signal(wave, cfg_.n_fft, cfg_.hop), window_);
  Tensor re = nn::matmul(frames, cos_);
  Tensor im = nn::matmul(frames, sin_);
  Tensor mag = nn::sqrt_clamped(nn::add(nn::square(re), nn::square(im)), 1e-9f);
  return nn::log_clamped(nn::matmul(mag, mel_basis_),
                         static_cast<Real>(dsp::kLogMelFloor));
}

Tensor discriminator_loss(const std::vector<Tensor>& real_scores,
                          const std::vector<Tensor>& fake_scores) {
  require(real_scores.size() == fake_scores.size(),
          "discriminator_loss: score map count mismatch");
  Tensor total = nn::constant(Matrix::Zero(1, 1));
  for (size_t i = 0; i < real_scores.size(); ++i) {
    total = nn::add(total, nn::mean(nn::square(nn::add_scalar(real_scores[i], -1))));
    total = nn::add(total, nn::mean(nn::square(fake_scores[i])));
  }
  return total;
}

Tensor generator_adversarial_loss(const std::vector<Tensor>& fake_scores) {
  Tensor total = nn::constant(Matrix::Zero(1, 1));
  for (const auto& s : fake_scores)
    total = nn::add(total, nn::mean(nn::square(nn::add_scalar(s, -1))));
  return total;
}

Tensor feature_matching_loss(const std::vector<std::vector<Tensor>>& real_features,
                             const std::vector<std::vector<Tensor>>& fake_features) {
  require(real_features.size() == fake_features.size(),
          "feature_matching_loss: sub-discriminator count mismatch");
  Tensor total = nn::constant(Matrix::Zero(1, 1));
  for (size_t d = 0; d < real_features.size(); ++d) {
    require(real_features[d].size() == fake_features[d].size(),
            "feature_matching_loss: layer count mismatch");
    for (size_t l = 0; l < real_features[d].size(); ++l)
      total = nn::add(total, nn::mean(nn::abs(nn::sub(
                                 nn::detach(real_features[d][l]),
                                 fake_features[d][l]))));
  }
  return total;
}

Tensor mel_l1_loss(const MelTransform& mel, const Tensor& real_wave,
                   const Tensor& fake_wave) {
  require(real_wave.rows() == fake_wave.rows(),
          "gan_losses: real and fake lengths differ (" +
              std::to_string(real_wave.rows()) + " vs " +
              std::to_string(fake_wave.rows()) + ")");
  Tensor target;
  {
    nn::NoGradGuard no_grad;
    target = mel(real_wave);
  }
  return nn::mean(nn::abs(nn::sub(mel(fake_wave), nn::detach(target))));
}

GanLosses gan_losses(const Discriminator& disc, const MelTransform& mel,
                     const Tensor& real_wave, const Tensor& fake_wave) {
  require(real_wave.rows() == fake_wave.rows(),
          "gan_losses: real and fake lengths differ (" +
              std::to_string(real_wave.rows()) + " vs " +
              std::to_string(fake_wave.rows()) + ")");
  GanLosses out;
  DiscriminatorOutput real = disc.discriminate(nn::detach(real_wave));
  DiscriminatorOutput fake_detached = disc.discriminate(nn::detach(fake_wave));
  out.disc = discriminator_loss(real.scores, fake_detached.scores);
  DiscriminatorOutput fake = disc.discriminate(fake_wave);
  out.gen = generator_adversarial_loss(fake.scores);
  out.feat_match = feature_matching_loss(real.features, fake.features);
  out.mel = mel_l1_loss(mel, real_wave, fake_wave);
  return out;
}

Slice random_slice(Eigen::Index valid, Eigen::Index frames, int hop, Rng& rng) {
  require(valid > 0 && frames > 0, "random_slice: empty range");
  Slice s;
  s.frames = std::min(valid, frames);
  s.frame_start = valid > frames ? rng.uniform_int(0, valid - frames) : 0;
  s.sample_start = s.frame_start * hop;
  s.samples = s.frames * hop;
  return s;
}

}  // namespace svs::vocoder
