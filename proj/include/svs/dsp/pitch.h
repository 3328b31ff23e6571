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

#ifndef SVS_DSP_PITCH_H_
#define SVS_DSP_PITCH_H_

#include <cmath>
#include <string>

#include "svs/core/types.h"

namespace svs::dsp {

inline constexpr int kRestNote = 0;
inline constexpr int kMidiMax = 127;

// Nearest MIDI note; 0 Hz (unvoiced) maps to the rest token.
template <typename Scalar>
int hz_to_midi(Scalar hz) {
  require(std::isfinite(static_cast<double>(hz)) && hz >= Scalar(0),
          "hz_to_midi: frequency must be finite and non-negative, got " +
              std::to_string(static_cast<double>(hz)));
  if (hz == Scalar(0)) return kRestNote;
  const double note =
      std::round(69.0 + 12.0 * std::log2(static_cast<double>(hz) / 440.0));
  if (note < 1.0) return 1;
  if (note > kMidiMax) return kMidiMax;
  return static_cast<int>(note);
}

template <typename Scalar = double>
Scalar midi_to_hz(int note) {
  require(note >= 1 && note <= kMidiMax,
          "rest has no frequency (note " + std::to_string(note) + ")");
  return static_cast<Scalar>(440.0 * std::exp2((note - 69) / 12.0));
}

// Signed distance in cents from `reference` to `hz`.
template <typename Scalar>
Scalar cents(Scalar hz, Scalar reference) {
  return Scalar(1200) * std::log2(hz / reference);
}

}  // namespace svs::dsp

#endif  // SVS_DSP_PITCH_H_
