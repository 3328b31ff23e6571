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

#ifndef SVS_TRAINER_TOY_CORPUS_H_
#define SVS_TRAINER_TOY_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <vector>

namespace svs::trainer {

struct ToyCorpusConfig {
  int singers = 2;
  int utterances_per_singer = 10;
  int notes_per_utterance = 4;
  int min_note_frames = 18;
  int max_note_frames = 28;
  int sample_rate = 24000;
  int hop = 256;
  uint64_t seed = 7;
};

struct ToyCorpusPaths {
  std::filesystem::path pretrain_manifest;  // lyrics only, every singer
  std::filesystem::path finetune_manifest;  // annotated, first singer
  std::filesystem::path finetune_single;    // annotated, one utterance
  std::vector<std::filesystem::path> wavs;
  double total_seconds = 0.0;
};

// Writes sine-vowel singing: every syllable is one note, initials are short
// noise bursts or murmurs, finals are harmonic tones whose spectral envelope
// depends on the vowel and the singer.
ToyCorpusPaths make_toy_corpus(const std::filesystem::path& out_dir,
                               const ToyCorpusConfig& config = {});

}  // namespace svs::trainer

#endif  // SVS_TRAINER_TOY_CORPUS_H_
