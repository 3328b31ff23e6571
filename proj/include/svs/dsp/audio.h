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

#ifndef SVS_DSP_AUDIO_H_
#define SVS_DSP_AUDIO_H_

#include <filesystem>

#include "svs/core/types.h"

namespace svs::dsp {

inline constexpr int kCanonicalSampleRate = 24000;

struct AudioClip {
  Eigen::VectorXd samples;  // mono, nominally in [-1, 1]
  int sample_rate = kCanonicalSampleRate;

  Eigen::Index size() const { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Throws "invalid audio" for non-finite samples or a bad rate.
void validate(const AudioClip& audio);

// Reads 16-bit PCM or 32-bit float WAV; multi-channel input is averaged.
AudioClip read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM, clipping to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioClip& audio);

// Band-limited (windowed-sinc) sample-rate conversion.
AudioClip resample(const AudioClip& audio, int target_rate);

// read_wav followed by conversion to the canonical rate when needed.
AudioClip load_audio(const std::filesystem::path& path,
                     int target_rate = kCanonicalSampleRate);

}  // namespace svs::dsp

#endif  // SVS_DSP_AUDIO_H_
