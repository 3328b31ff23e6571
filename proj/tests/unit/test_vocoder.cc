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


#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "svs/core/rng.h"
#include "svs/dsp/features.h"
#include "svs/nn/ops.h"
#include "svs/nn/optim.h"
#include "svs/vocoder/vocoder.h"

namespace svs::vocoder {
namespace {

using nn::Tensor;

DecoderConfig small_decoder() {
  DecoderConfig c;
  c.in_channels = 12;
  c.initial_channels = 16;
  return c;
}

prior::SpeakerEmbedding speaker() {
  return {nn::constant(Matrix::Constant(1, prior::kSpeakerDim, 0.1f)), {}};
}

struct VocoderFixture {
  nn::ParameterStore store;
  Generator gen;
  Discriminator disc;
  VocoderFixture() {
    Rng rng(1);
    gen = Generator(store, rng, small_decoder());
    disc = Discriminator(store, rng, {});
  }
};

Matrix sine_wave(Eigen::Index n, double hz, double amp = 0.5) {
  Matrix w(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) w(i, 0) = static_cast<Real>(amp * std::sin(2 * M_PI * hz * i / 24000.0));
  return w;
}

TEST(Generator, OutputLengthLaw) {
  VocoderFixture f;
  Rng rng(2);
  for (Eigen::Index t : {1, 2, 5, 32, 77}) {
    Tensor z = nn::constant(rng.normal_matrix<Real>(t, 12));
    Tensor wave = f.gen.decode(z, speaker());
    EXPECT_EQ(wave.rows(), t * 256);
    EXPECT_EQ(wave.cols(), 1);
    EXPECT_TRUE(wave.value().allFinite());
    Tensor f0 = nn::constant(Matrix::Constant(t, 1, 220.0f));
    EXPECT_EQ(f.gen.decode(z, speaker(), f0).rows(), t * 256);
  }
  EXPECT_THROW(f.gen.decode(nn::constant(Matrix::Zero(0, 12)), speaker()), Error);
  EXPECT_THROW(f.gen.decode(nn::constant(Matrix::Zero(4, 11)), speaker()), Error);
}

TEST(Generator, OutputLengthLawFullRange) {
  VocoderFixture f;
  Rng rng(3);
  for (Eigen::Index t = 1; t <= 256; t += 17)
    EXPECT_EQ(f.gen.decode(nn::constant(rng.normal_matrix<Real>(t, 12)), speaker()).rows(),
              t * 256);
}

TEST(Generator, DeterministicAndDifferentiable) {
  VocoderFixture f;
  Rng rng(4);
  Matrix zm = rng.normal_matrix<Real>(6, 12);
  Tensor f0 = nn::constant(Matrix::Constant(6, 1, 300.0f));
  Matrix a = f.gen.decode(nn::constant(zm), speaker(), f0).value();
  Matrix b = f.gen.decode(nn::constant(zm), speaker(), f0).value();
  EXPECT_TRUE(a == b);
  Tensor z(zm, true);
  nn::backward(nn::mean(nn::abs(f.gen.decode(z, speaker(), f0))));
  EXPECT_GT(z.grad().cwiseAbs().maxCoeff(), 0.0f);
}

TEST(Generator, HarmonicBank) {
  Matrix f0(3, 1);
  f0 << 100.0f, 0.0f, 200.0f;
  Matrix bank = harmonic_bank(f0, 256, 24000, 4);
  EXPECT_EQ(bank.rows(), 768);
  EXPECT_EQ(bank.cols(), 4);
  EXPECT_EQ(bank.block(256, 0, 256, 4).cwiseAbs().maxCoeff(), 0.0f);
  EXPECT_LE(bank.cwiseAbs().maxCoeff(), 1.0f + 1e-6f);
}

TEST(Discriminator, ScoresAndFeatures) {
  VocoderFixture f;
  Tensor wave = nn::constant(sine_wave(2048, 440.0));
  auto a = f.disc.discriminate(wave);
  auto b = f.disc.discriminate(wave);
  EXPECT_EQ(a.scores.size(), f.disc.sub_discriminators());
  EXPECT_EQ(a.scores.size(), 4u);
  EXPECT_EQ(a.features.size(), 4u);
  for (size_t i = 0; i < a.scores.size(); ++i) {
    EXPECT_TRUE(a.scores[i].value() == b.scores[i].value());
    EXPECT_FALSE(a.features[i].empty());
  }
  EXPECT_THROW(f.disc.discriminate(nn::constant(sine_wave(100, 440.0))), Error);
}

TEST(Losses, IdentityAndPerfectDiscriminator) {
  VocoderFixture f;
  MelTransform mel;
  Tensor real = nn::constant(sine_wave(4096, 330.0));
  auto same = gan_losses(f.disc, mel, real, real);
  EXPECT_NEAR(same.mel.item(), 0.0, 1e-7);
  EXPECT_NEAR(same.feat_match.item(), 0.0, 1e-7);

  std::vector<Tensor> ones, zeros;
  for (int i = 0; i < 4; ++i) {
    ones.push_back(nn::constant(Matrix::Ones(5, 1)));
    zeros.push_back(nn::constant(Matrix::Zero(5, 1)));
  }
  EXPECT_EQ(discriminator_loss(ones, zeros).item(), 0.0f);
  EXPECT_EQ(generator_adversarial_loss(ones).item(), 0.0f);
  EXPECT_NEAR(generator_adversarial_loss(zeros).item(), 4.0, 1e-6);

  Rng rng(5);
  Tensor fake = nn::constant(rng.normal_matrix<Real>(4096, 1, 0.1));
  auto l = gan_losses(f.disc, mel, real, fake);
  EXPECT_GE(l.gen.item(), 0.0f);
  EXPECT_GE(l.disc.item(), 0.0f);
  EXPECT_GE(l.feat_match.item(), 0.0f);
  EXPECT_GT(l.mel.item(), 0.0f);
  EXPECT_THROW(gan_losses(f.disc, mel, real, nn::constant(Matrix::Zero(4000, 1))), Error);
}

TEST(Losses, MelMatchesFeatureExtractor) {
  dsp::FeatureConfig cfg;
  MelTransform mel(cfg);
  Rng rng(6);
  Matrix real = sine_wave(6000, 250.0);
  Matrix fake = sine_wave(6000, 270.0, 0.3) + rng.normal_matrix<Real>(6000, 1, 0.01);
  const double loss = mel_l1_loss(mel, nn::constant(real), nn::constant(fake)).item();
  auto ref = [&](const Matrix& w) {
    return dsp::log_mel(dsp::stft_magnitude(w.col(0).cast<double>(), cfg), cfg);
  };
  const double oracle = (ref(real) - ref(fake)).cwiseAbs().mean();
  EXPECT_NEAR(loss, oracle, 1e-3 * std::max(1.0, oracle));
}

TEST(Slicing, OffsetsAreExact) {
  Rng rng(7);
  Matrix wave(100 * 256, 1);
  for (Eigen::Index i = 0; i < wave.rows(); ++i) wave(i, 0) = static_cast<Real>(i);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index valid = 1 + rng.uniform_int(0, 99);
    Slice s = random_slice(valid, 32, 256, rng);
    EXPECT_EQ(s.frames, std::min<Eigen::Index>(valid, 32));
    EXPECT_EQ(s.sample_start, s.frame_start * 256);
    EXPECT_EQ(s.samples, s.frames * 256);
    EXPECT_LE(s.frame_start + s.frames, valid);
    Tensor seg = nn::slice_rows(nn::constant(wave), s.sample_start, s.samples);
    EXPECT_EQ(seg.value()(0, 0), static_cast<Real>(s.frame_start * 256));
  }
}

TEST(Discriminator, LearnsToSeparateRealFromFake) {
  VocoderFixture f;
  Rng rng(8);
  nn::AdamW opt(f.store.tensors_in_groups({"discriminator"}), {});
  Tensor fake = nn::constant(f.gen.decode(nn::constant(rng.normal_matrix<Real>(8, 12)), speaker()).value());
  Tensor real = nn::constant(sine_wave(2048, 220.0));
  auto mean_score = [&](const Tensor& w) {
    double acc = 0.0;
    for (const auto& s : f.disc.discriminate(w).scores) acc += s.value().mean();
    return acc;
  };
  for (int step = 0; step < 100; ++step) {
    opt.zero_grad();
    nn::backward(discriminator_loss(f.disc.discriminate(real).scores,
                                    f.disc.discriminate(fake).scores));
    opt.step(2e-4);
  }
  EXPECT_GT(mean_score(real), mean_score(fake));
}

}  // namespace
}  // namespace svs::vocoder
