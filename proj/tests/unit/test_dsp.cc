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


#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "svs/core/rng.h"
#include "svs/dsp/audio.h"
#include "svs/dsp/features.h"
#include "svs/dsp/pitch.h"

namespace svs::dsp {
namespace {

AudioClip sine(double hz, double seconds, double amp = 0.5, int sr = 24000) {
  AudioClip clip;
  clip.sample_rate = sr;
  const auto n = static_cast<Eigen::Index>(seconds * sr);
  clip.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    clip.samples(i) = amp * std::sin(2.0 * M_PI * hz * i / sr);
  return clip;
}

double median_voiced(const F0Contour& f0) {
  std::vector<double> v;
  for (Eigen::Index t = 0; t < f0.size(); ++t)
    if (f0.voiced[t]) v.push_back(f0.hz(t));
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

double voiced_fraction(const F0Contour& f0) {
  return static_cast<double>(std::count(f0.voiced.begin(), f0.voiced.end(), true)) /
         f0.size();
}

TEST(Pitch, HzToMidiReferencePoints) {
  EXPECT_EQ(hz_to_midi(440.0), 69);
  EXPECT_EQ(hz_to_midi(0.0), kRestNote);
  EXPECT_EQ(hz_to_midi(261.626), 60);
  EXPECT_EQ(hz_to_midi(1e-3), 1);
  EXPECT_EQ(hz_to_midi(1e6), 127);
}

TEST(Pitch, HzToMidiRejectsBadInput) {
  EXPECT_THROW(hz_to_midi(-1.0), Error);
  EXPECT_THROW(hz_to_midi(std::nan("")), Error);
  EXPECT_THROW(hz_to_midi(INFINITY), Error);
}

TEST(Pitch, MidiToHzReferencePoints) {
  EXPECT_DOUBLE_EQ(midi_to_hz(69), 440.0);
  EXPECT_NEAR(midi_to_hz(53), 174.614, 1e-3);
  EXPECT_NEAR(midi_to_hz(74), 587.330, 1e-3);
  EXPECT_THROW(midi_to_hz(0), Error);
  EXPECT_THROW(midi_to_hz(128), Error);
  try {
    midi_to_hz(0);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("rest has no frequency"), std::string::npos);
  }
}

TEST(Pitch, RoundTripWithinHalfSemitone) {
  for (double f = 60.0; f <= 1000.0; f *= 1.0137) {
    const double back = midi_to_hz(hz_to_midi(f));
    EXPECT_LE(std::abs(cents(back, f)), 50.0 + 1e-9) << f;
  }
}

TEST(Pitch, Monotone) {
  int prev = 0;
  for (double f = 1.0; f < 20000.0; f *= 1.01) {
    const int m = hz_to_midi(f);
    EXPECT_GE(m, prev);
    prev = m;
  }
}

TEST(Features, FrameCountMatchesCenteredStft) {
  FeatureConfig cfg;
  for (Eigen::Index n : {1024, 24000, 24001, 25600, 30000}) {
    // centered framing pads n_fft/2 on both sides
    const Eigen::Index padded = n + 2 * (cfg.n_fft / 2);
    const Eigen::Index oracle = 1 + (padded - cfg.n_fft) / cfg.hop;
    EXPECT_EQ(cfg.frame_count(n), oracle);
    AudioClip clip = sine(220.0, 0.0);
    clip.samples = Eigen::VectorXd::Constant(n, 0.01);
    auto fb = extract_features(clip, cfg);
    EXPECT_EQ(fb.frames(), oracle);
    EXPECT_EQ(fb.linear_spec.rows(), oracle);
    EXPECT_EQ(fb.mel_spec.rows(), oracle);
    EXPECT_EQ(fb.f0.size(), oracle);
    EXPECT_EQ(fb.linear_spec.cols(), cfg.linear_bins());
    EXPECT_EQ(fb.mel_spec.cols(), 80);
  }
  AudioClip one_second = sine(220.0, 1.0);
  EXPECT_EQ(extract_features(one_second, cfg).frames(), 94);
}

TEST(Features, SilenceIsUnvoicedWithZeroEnergy) {
  AudioClip clip;
  clip.samples = Eigen::VectorXd::Zero(24000);
  auto fb = extract_features(clip, FeatureConfig{});
  EXPECT_EQ(fb.energy.maxCoeff(), 0.0);
  EXPECT_EQ(voiced_fraction(fb.f0), 0.0);
  EXPECT_TRUE(fb.mel_spec.allFinite());
}

TEST(Features, SineOracles) {
  FeatureConfig cfg;
  struct Case { double hz, lo, hi; };
  for (const Case c : {Case{220.0, 218.0, 222.0}, Case{440.0, 438.0, 442.0},
                       Case{100.0, 98.0, 102.0}}) {
    auto f0 = estimate_f0(sine(c.hz, 1.0), cfg);
    EXPECT_GT(voiced_fraction(f0), 0.9) << c.hz;
    const double med = median_voiced(f0);
    EXPECT_GE(med, c.lo) << c.hz;
    EXPECT_LE(med, c.hi) << c.hz;
  }
}

TEST(Features, NoiseIsMostlyUnvoiced) {
  Rng rng(3);
  AudioClip clip;
  clip.samples.resize(24000);
  for (Eigen::Index i = 0; i < clip.size(); ++i) clip.samples(i) = 0.01 * rng.normal();
  EXPECT_LT(voiced_fraction(estimate_f0(clip, FeatureConfig{})), 0.5);
}

TEST(Features, F0ContourInvariants) {
  Rng rng(5);
  AudioClip clip = sine(330.0, 0.7);
  for (Eigen::Index i = 0; i < clip.size(); ++i) clip.samples(i) += 0.05 * rng.normal();
  auto f0 = estimate_f0(clip, FeatureConfig{});
  for (Eigen::Index t = 0; t < f0.size(); ++t) {
    EXPECT_EQ(f0.hz(t) > 0.0, static_cast<bool>(f0.voiced[t]));
    if (f0.voiced[t]) {
      EXPECT_GE(f0.hz(t), 40.0);
      EXPECT_LE(f0.hz(t), 1500.0);
    }
  }
}

TEST(Features, MagnitudeMatchesDirectDft) {
  FeatureConfig cfg;
  AudioClip clip = sine(523.0, 0.5);
  Rng rng(11);
  for (Eigen::Index i = 0; i < clip.size(); ++i) clip.samples(i) += 0.1 * rng.normal();
  const auto mag = stft_magnitude(clip.samples, cfg);
  const int t = 10;  // interior frame, unaffected by edge padding
  const Eigen::Index start = t * cfg.hop - cfg.n_fft / 2;
  for (int k : {0, 5, 22, 100, 512}) {
    std::complex<double> acc = 0.0;
    for (int n = 0; n < cfg.n_fft; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / cfg.n_fft);
      acc += w * clip.samples(start + n) *
             std::polar(1.0, -2.0 * M_PI * k * n / cfg.n_fft);
    }
    EXPECT_NEAR(mag(t, k), std::abs(acc), 1e-6 * std::max(1.0, std::abs(acc))) << k;
  }
}

TEST(Features, MelFilterbankShape) {
  FeatureConfig cfg;
  auto fb = mel_filterbank(cfg);
  EXPECT_EQ(fb.rows(), cfg.linear_bins());
  EXPECT_EQ(fb.cols(), cfg.n_mels);
  EXPECT_GE(fb.minCoeff(), 0.0);
  for (int m = 0; m < cfg.n_mels; ++m) EXPECT_GT(fb.col(m).sum(), 0.0) << m;
}

TEST(Features, EnergyIsFrameRms) {
  FeatureConfig cfg;
  AudioClip clip = sine(200.0, 0.5, 0.8);
  auto fb = extract_features(clip, cfg);
  // interior frames of a steady sine carry RMS amp / sqrt(2)
  EXPECT_NEAR(fb.energy(20), 0.8 / std::sqrt(2.0), 0.02);
  EXPECT_GE(fb.energy.minCoeff(), 0.0);
}

TEST(Features, Deterministic) {
  Rng rng(8);
  AudioClip clip = sine(300.0, 0.4);
  for (Eigen::Index i = 0; i < clip.size(); ++i) clip.samples(i) += 0.1 * rng.normal();
  auto a = extract_features(clip, FeatureConfig{});
  auto b = extract_features(clip, FeatureConfig{});
  EXPECT_TRUE(a.linear_spec == b.linear_spec);
  EXPECT_TRUE(a.mel_spec == b.mel_spec);
  EXPECT_TRUE(a.energy == b.energy);
  EXPECT_TRUE(a.f0.hz == b.f0.hz);
}

TEST(Features, Errors) {
  AudioClip short_clip;
  short_clip.samples = Eigen::VectorXd::Zero(100);
  EXPECT_THROW(extract_features(short_clip, FeatureConfig{}), Error);
  try {
    extract_features(short_clip, FeatureConfig{});
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("audio too short"), std::string::npos);
  }
  AudioClip bad = sine(200.0, 0.2);
  bad.samples(50) = std::nan("");
  try {
    extract_features(bad, FeatureConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("invalid audio"), std::string::npos);
  }
}

TEST(Audio, WavRoundTripAndResample) {
  const auto path = std::filesystem::temp_directory_path() / "svs_test_dsp.wav";
  AudioClip clip = sine(440.0, 0.25, 0.5, 16000);
  write_wav(path, clip);
  AudioClip back = read_wav(path);
  EXPECT_EQ(back.sample_rate, 16000);
  ASSERT_EQ(back.size(), clip.size());
  EXPECT_LT((back.samples - clip.samples).cwiseAbs().maxCoeff(), 1.0 / 32767.0);
  AudioClip up = load_audio(path);
  EXPECT_EQ(up.sample_rate, 24000);
  EXPECT_NEAR(static_cast<double>(up.size()), clip.size() * 1.5, 2.0);
  auto f0 = estimate_f0(up, FeatureConfig{});
  EXPECT_NEAR(median_voiced(f0), 440.0, 2.0);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace svs::dsp
