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

#include "svs/dsp/features.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

namespace svs::dsp {

namespace {

void check_clip(const AudioClip& audio, const FeatureConfig& cfg) {
  validate(audio);
  require(audio.sample_rate == cfg.sample_rate,
          "audio sample rate " + std::to_string(audio.sample_rate) +
              " does not match feature config " +
              std::to_string(cfg.sample_rate));
  require(audio.samples.size() >= cfg.n_fft, "audio too short");
}

Eigen::Index reflect(Eigen::Index j, Eigen::Index len) {
  if (j < 0) return -j;
  if (j >= len) return 2 * (len - 1) - j;
  return j;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace

F0Contour F0Contour::from_hz(const Eigen::VectorXd& hz) {
  F0Contour c;
  c.hz = hz;
  c.voiced.resize(static_cast<size_t>(hz.size()));
  for (Eigen::Index t = 0; t < hz.size(); ++t) c.voiced[t] = hz(t) > 0.0;
  return c;
}

Eigen::VectorXd hann_window(int length) {
  Eigen::VectorXd w(length);
  for (int i = 0; i < length; ++i)
    w(i) = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / length);
  return w;
}

MatrixT<double> frame_signal(const Eigen::VectorXd& x, int frame_len, int hop) {
  const Eigen::Index len = x.size();
  const int pad = frame_len / 2;
  require(len > pad, "audio too short");
  const Eigen::Index frames = len / hop + 1;
  MatrixT<double> out(frames, frame_len);
  for (Eigen::Index f = 0; f < frames; ++f)
    for (int k = 0; k < frame_len; ++k)
      out(f, k) = x(reflect(f * hop + k - pad, len));
  return out;
}

MatrixT<double> mel_filterbank(const FeatureConfig& cfg) {
  const int bins = cfg.linear_bins();
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(static_cast<size_t>(cfg.n_mels) + 2);
  for (size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));

  MatrixT<double> fb = MatrixT<double>::Zero(bins, cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    const double norm = 2.0 / (hi - lo);
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.n_fft;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      fb(k, m) = norm * std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

MatrixT<double> stft_magnitude(const Eigen::VectorXd& x,
                               const FeatureConfig& cfg) {
  const MatrixT<double> frames = frame_signal(x, cfg.n_fft, cfg.hop);
  const Eigen::VectorXd window = hann_window(cfg.n_fft);
  const int bins = cfg.linear_bins();
  Eigen::FFT<double> fft;
  MatrixT<double> mag(frames.rows(), bins);
  std::vector<double> buf(static_cast<size_t>(cfg.n_fft));
  std::vector<std::complex<double>> spec;
  for (Eigen::Index f = 0; f < frames.rows(); ++f) {
    for (int k = 0; k < cfg.n_fft; ++k) buf[k] = frames(f, k) * window(k);
    fft.fwd(spec, buf);
    for (int k = 0; k < bins; ++k) mag(f, k) = std::abs(spec[k]);
  }
  return mag;
}

MatrixT<double> log_mel(const MatrixT<double>& magnitude,
                        const FeatureConfig& cfg) {
  MatrixT<double> mel = magnitude * mel_filterbank(cfg);
  return mel.array().max(kLogMelFloor).log();
}

F0Contour AutocorrelationPitchEstimator::estimate(
    const AudioClip& audio, const FeatureConfig& cfg) const {
  check_clip(audio, cfg);
  const Eigen::VectorXd& x = audio.samples;
  const Eigen::Index len = x.size();
  const Eigen::Index frames = cfg.frame_count(len);
  const int window = cfg.n_fft;
  const int lag_min =
      std::max(2, static_cast<int>(std::floor(cfg.sample_rate / cfg.f0_max)));
  const int lag_max = static_cast<int>(std::ceil(cfg.sample_rate / cfg.f0_min));

  // Zero-extended copy so every analysis span is in range.
  const Eigen::Index pad = window / 2;
  Eigen::VectorXd ext = Eigen::VectorXd::Zero(len + window + lag_max + 2);
  ext.segment(pad, len) = x;

  Eigen::VectorXd r(lag_max + 2);
  Eigen::VectorXd hz = Eigen::VectorXd::Zero(frames);
  for (Eigen::Index f = 0; f < frames; ++f) {
    const Eigen::Index start = f * cfg.hop;  // frame center minus pad
    const auto head = ext.segment(start, window);
    const double e0 = head.squaredNorm();
    if (std::sqrt(e0 / window) < cfg.voicing_rms) continue;

    r.setZero();
    for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      const auto tail = ext.segment(start + lag, window);
      const double denom = std::sqrt(e0 * tail.squaredNorm());
      r(lag) = denom > 0.0 ? head.dot(tail) / denom : 0.0;
    }

    double best = 0.0;
    for (int lag = lag_min; lag <= lag_max; ++lag)
      if (r(lag) > r(lag - 1) && r(lag) >= r(lag + 1)) best = std::max(best, r(lag));
    if (best < cfg.voicing_periodicity) continue;

    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (!(r(lag) > r(lag - 1) && r(lag) >= r(lag + 1))) continue;
      if (r(lag) < 0.9 * best) continue;
      const double a = r(lag - 1), b = r(lag), c = r(lag + 1);
      const double curvature = a - 2.0 * b + c;
      const double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
      const double f0 = cfg.sample_rate / (lag + shift);
      if (f0 >= cfg.f0_min && f0 <= cfg.f0_max) hz(f) = f0;
      break;
    }
  }
  return F0Contour::from_hz(hz);
}

FeatureBundle extract_features(const AudioClip& audio, const FeatureConfig& cfg,
                               const PitchEstimator& estimator) {
  check_clip(audio, cfg);
  FeatureBundle out;
  out.linear_spec = stft_magnitude(audio.samples, cfg);
  out.mel_spec = log_mel(out.linear_spec, cfg);
  const MatrixT<double> frames = frame_signal(audio.samples, cfg.n_fft, cfg.hop);
  out.energy = (frames.array().square().rowwise().mean()).sqrt().matrix();
  out.f0 = estimator.estimate(audio, cfg);
  return out;
}

FeatureBundle extract_features(const AudioClip& audio,
                               const FeatureConfig& cfg) {
  return extract_features(audio, cfg, AutocorrelationPitchEstimator{});
}

F0Contour estimate_f0(const AudioClip& audio, const FeatureConfig& cfg) {
  return AutocorrelationPitchEstimator{}.estimate(audio, cfg);
}

}  // namespace svs::dsp
