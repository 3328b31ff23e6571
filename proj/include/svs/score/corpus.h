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

#ifndef SVS_SCORE_CORPUS_H_
#define SVS_SCORE_CORPUS_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svs/dsp/features.h"
#include "svs/score/score.h"

namespace svs::score {

enum class Stage { kPretrain, kFinetune };

const char* stage_name(Stage stage);
Stage parse_stage(const std::string& name);

// One manifest entry. Pre-training utterances carry an untimed phoneme
// sequence from lyrics; fine-tuning utterances carry a timed score.
struct Utterance {
  std::string utt_id;
  std::filesystem::path audio_path;
  std::string singer_id;
  std::optional<MusicalScore> score;
  std::vector<int> phoneme_sequence;

  Stage stage() const { return score ? Stage::kFinetune : Stage::kPretrain; }
};

// `wav_path<TAB>singer_id<TAB>annotation-or-lyrics`; a third field that
// contains '|' is an annotation, anything else is lyrics. Relative wav paths
// resolve against the manifest's directory.
std::vector<Utterance> read_manifest(const std::filesystem::path& path,
                                     const PhonemeLexicon& lexicon,
                                     const GraphemeToPhoneme& g2p,
                                     const FrameTiming& timing = {});

struct PreparedUtterance {
  Utterance meta;
  dsp::AudioClip audio;
  dsp::FeatureBundle features;
};

PreparedUtterance prepare_utterance(const Utterance& utt,
                                    const dsp::FeatureConfig& cfg);
std::vector<PreparedUtterance> prepare_corpus(
    const std::vector<Utterance>& utts, const dsp::FeatureConfig& cfg);

// Zero-padded batch. Masks are 1 inside each item's true length.
struct Batch {
  Stage stage = Stage::kPretrain;
  std::vector<const PreparedUtterance*> items;
  std::vector<Eigen::Index> frame_lengths;
  std::vector<Eigen::Index> symbol_lengths;
  Eigen::Index max_frames = 0;
  Eigen::Index max_symbols = 0;
  Eigen::Index hop = 256;

  std::vector<MatrixT<double>> linear_spec;  // each [max_frames x bins]
  std::vector<MatrixT<double>> mel_spec;     // each [max_frames x mels]
  MatrixT<double> energy;                    // [B x max_frames]
  MatrixT<double> f0_hz;                     // [B x max_frames]
  MatrixT<double> frame_mask;                // [B x max_frames]
  Eigen::MatrixXi phoneme_ids;               // [B x max_symbols]
  Eigen::MatrixXi pitch_ids;                 // fine-tuning only
  Eigen::MatrixXi durations_frames;          // fine-tuning only
  MatrixT<double> symbol_mask;               // [B x max_symbols]
  MatrixT<double> waveforms;                 // [B x max_frames * hop]

  size_t size() const { return items.size(); }
};

Batch build_batch(std::span<const PreparedUtterance* const> items);

}  // namespace svs::score

#endif  // SVS_SCORE_CORPUS_H_
