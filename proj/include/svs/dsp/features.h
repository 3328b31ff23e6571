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

#ifndef SVS_DSP_FEATURES_H_
#define SVS_DSP_FEATURES_H_

#include <memory>
#include <vector>

#include "svs/core/types.h"
#include "svs/dsp/audio.h"

namespace svs::dsp {

struct FeatureConfig {
  int sample_rate = kCanonicalSampleRate;
  int n_fft = 1024;
  int hop = 256;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 12000.0;
  double f0_min = 40.0;
  double f0_max = 1500.0;
  double voicing_rms = 5e-3;          // absolute frame RMS floor
  double voicing_periodicity = 0.5;   // normalized autocorrelation peak floor

  int linear_bins() const { return n_fft / 2 + 1; }
  // Center-padded framing: one frame per hop plus the trailing frame.
  Eigen::Index frame_count(Eigen::Index num_samples) const {
    return num_samples / hop + 1;
  }
};

struct F0Contour {
  Eigen::VectorXd hz;   // 0 where unvoiced
  std::vector<bool> voiced;

  Eigen::Index size() const { return hz.size(); }
  static F0Contour from_hz(const Eigen::VectorXd& hz);
};

struct FeatureBundle {
  MatrixT<double> linear_spec;  // [T x n_fft/2+1] magnitude
  MatrixT<double> mel_spec;     // [T x n_mels] natural-log mel
  Eigen::VectorXd energy;       // [T] frame RMS
  F0Contour f0;

  Eigen::Index frames() const { return energy.size(); }
};

// Swappable f0 estimation strategy.
class PitchEstimator {
 public:
  virtual ~PitchEstimator() = default;
  virtual F0Contour estimate(const AudioClip& audio,
                             const FeatureConfig& cfg) const = 0;
};

// Normalized autocorrelation over the lag range of [f0_min, f0_max], first
// strong peak with parabolic refinement, voiced when both the frame RMS and
// the peak correlation clear their thresholds.
class AutocorrelationPitchEstimator : public PitchEstimator {
 public:
  F0Contour estimate(const AudioClip& audio,
                     const FeatureConfig& cfg) const override;
};

FeatureBundle extract_features(const AudioClip& audio, const FeatureConfig& cfg,
                               const PitchEstimator& estimator);
FeatureBundle extract_features(const AudioClip& audio,
                               const FeatureConfig& cfg);
F0Contour estimate_f0(const AudioClip& audio, const FeatureConfig& cfg);

// Building blocks shared with the differentiable mel loss.
MatrixT<double> mel_filterbank(const FeatureConfig& cfg);  // [bins x mels]
Eigen::VectorXd hann_window(int length);                   // periodic
MatrixT<double> frame_signal(const Eigen::VectorXd& x, int frame_len, int hop);
MatrixT<double> stft_magnitude(const Eigen::VectorXd& x, const FeatureConfig& cfg);
MatrixT<double> log_mel(const MatrixT<double>& magnitude, const FeatureConfig& cfg);

inline constexpr double kLogMelFloor = 1e-5;

}  // namespace svs::dsp

#endif  // SVS_DSP_FEATURES_H_
