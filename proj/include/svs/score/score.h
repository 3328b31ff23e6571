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

#ifndef SVS_SCORE_SCORE_H_
#define SVS_SCORE_SCORE_H_

#include <string>
#include <vector>

#include "svs/score/lexicon.h"

namespace svs::score {

struct FrameTiming {
  int sample_rate = 24000;
  int hop = 256;

  // Round-half-up conversion; durations that round to zero keep one frame.
  int seconds_to_frames(double seconds) const;
  double frames_to_seconds(int frames) const;
};

// Phoneme-level symbolic input. note_durations_frames holds each phoneme's
// own span in frames; phonemes that share a note carry the same note_index,
// and a note's length is the sum of its phonemes' spans.
struct MusicalScore {
  std::string utt_id;
  std::vector<int> phoneme_ids;
  std::vector<int> note_pitch_ids;
  std::vector<int> note_durations_frames;
  std::vector<int> note_index;

  size_t size() const { return phoneme_ids.size(); }
  int total_frames() const;
  int note_count() const;
  // Per phoneme: the frame length of the note it belongs to.
  std::vector<int> note_lengths_per_phoneme() const;

  void validate(int vocab_size) const;
};

// A phoneme starts a new note unless the previous phoneme is an initial
// consonant sung on the same pitch.
std::vector<int> group_notes(const std::vector<int>& phoneme_ids,
                             const std::vector<int>& pitches,
                             const PhonemeLexicon& lexicon);

// `utt_id|phonemes|midi-notes|durations-sec`, space-separated tokens with
// equal counts in the last three fields. Any extra fields (slur flags,
// phonetic timing) are accepted and ignored.
MusicalScore parse_annotation(const std::string& line,
                              const PhonemeLexicon& lexicon,
                              const FrameTiming& timing = {});

std::string serialize_annotation(const MusicalScore& score,
                                 const PhonemeLexicon& lexicon,
                                 const FrameTiming& timing = {});

// Makes the durations sum to `frames` by adjusting the final phoneme.
void absorb_residual(MusicalScore& score, int frames);

}  // namespace svs::score

#endif  // SVS_SCORE_SCORE_H_
