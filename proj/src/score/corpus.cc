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

#include "svs/score/corpus.h"

#include <algorithm>
#include <fstream>

namespace svs::score {

const char* stage_name(Stage stage) {
  return stage == Stage::kPretrain ? "pretrain" : "finetune";
}

Stage parse_stage(const std::string& name) {
  if (name == "pretrain") return Stage::kPretrain;
  if (name == "finetune") return Stage::kFinetune;
  throw Error("unknown stage '" + name + "'");
}

std::vector<Utterance> read_manifest(const std::filesystem::path& path,
                                     const PhonemeLexicon& lexicon,
                                     const GraphemeToPhoneme& g2p,
                                     const FrameTiming& timing) {
  std::ifstream in(path);
  require(in.good(), "cannot open manifest: " + path.string());
  const auto base = path.parent_path();
  std::vector<Utterance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    require(tab2 != std::string::npos,
            path.string() + ":" + std::to_string(line_no) +
                ": expected wav_path<TAB>singer_id<TAB>annotation-or-lyrics");
    Utterance utt;
    utt.audio_path = line.substr(0, tab1);
    if (utt.audio_path.is_relative()) utt.audio_path = base / utt.audio_path;
    utt.singer_id = line.substr(tab1 + 1, tab2 - tab1 - 1);
    require(!utt.singer_id.empty(),
            path.string() + ":" + std::to_string(line_no) + ": empty singer id");
    const std::string payload = line.substr(tab2 + 1);
    try {
      if (payload.find('|') != std::string::npos) {
        utt.score = parse_annotation(payload, lexicon, timing);
        utt.utt_id = utt.score->utt_id;
      } else {
        utt.phoneme_sequence = lyrics_to_phonemes(payload, lexicon, g2p);
        utt.utt_id = utt.audio_path.stem().string();
      }
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(utt));
  }
  require(!out.empty(), "manifest has no utterances: " + path.string());
  return out;
}

PreparedUtterance prepare_utterance(const Utterance& utt,
                                    const dsp::FeatureConfig& cfg) {
  PreparedUtterance p;
  p.meta = utt;
  p.audio = dsp::load_audio(utt.audio_path, cfg.sample_rate);
  p.features = dsp::extract_features(p.audio, cfg);
  if (p.meta.score)
    absorb_residual(*p.meta.score, static_cast<int>(p.features.frames()));
  return p;
}

std::vector<PreparedUtterance> prepare_corpus(
    const std::vector<Utterance>& utts, const dsp::FeatureConfig& cfg) {
  std::vector<PreparedUtterance> out;
  out.reserve(utts.size());
  for (const auto& u : utts) out.push_back(prepare_utterance(u, cfg));
  return out;
}

Batch build_batch(std::span<const PreparedUtterance* const> items) {
  require(!items.empty(), "cannot build an empty batch");
  Batch b;
  b.stage = items[0]->meta.stage();
  for (const auto* item : items)
    require(item->meta.stage() == b.stage,
            "batch mixes pre-training and fine-tuning utterances");

  const auto& first = items[0]->features;
  const Eigen::Index bins = first.linear_spec.cols();
  const Eigen::Index mels = first.mel_spec.cols();
  for (const auto* item : items) {
    b.items.push_back(item);
    b.frame_lengths.push_back(item->features.frames());
    b.symbol_lengths.push_back(
        item->meta.score ? static_cast<Eigen::Index>(item->meta.score->size())
                         : static_cast<Eigen::Index>(item->meta.phoneme_sequence.size()));
  }
  b.max_frames = *std::max_element(b.frame_lengths.begin(), b.frame_lengths.end());
  b.max_symbols = *std::max_element(b.symbol_lengths.begin(), b.symbol_lengths.end());
  const Eigen::Index n = static_cast<Eigen::Index>(items.size());
  const Eigen::Index samples = b.max_frames * b.hop;

  b.energy = MatrixT<double>::Zero(n, b.max_frames);
  b.f0_hz = MatrixT<double>::Zero(n, b.max_frames);
  b.frame_mask = MatrixT<double>::Zero(n, b.max_frames);
  b.phoneme_ids = Eigen::MatrixXi::Zero(n, b.max_symbols);
  b.pitch_ids = Eigen::MatrixXi::Zero(n, b.max_symbols);
  b.durations_frames = Eigen::MatrixXi::Zero(n, b.max_symbols);
  b.symbol_mask = MatrixT<double>::Zero(n, b.max_symbols);
  b.waveforms = MatrixT<double>::Zero(n, samples);

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& item = *items[static_cast<size_t>(i)];
    const auto& f = item.features;
    const Eigen::Index t = f.frames();
    MatrixT<double> lin = MatrixT<double>::Zero(b.max_frames, bins);
    MatrixT<double> mel = MatrixT<double>::Zero(b.max_frames, mels);
    lin.topRows(t) = f.linear_spec;
    mel.topRows(t) = f.mel_spec;
    b.linear_spec.push_back(std::move(lin));
    b.mel_spec.push_back(std::move(mel));
    b.energy.row(i).head(t) = f.energy.transpose();
    b.f0_hz.row(i).head(t) = f.f0.hz.transpose();
    b.frame_mask.row(i).head(t).setOnes();

    const Eigen::Index p = b.symbol_lengths[static_cast<size_t>(i)];
    if (item.meta.score) {
      const auto& s = *item.meta.score;
      for (Eigen::Index j = 0; j < p; ++j) {
        b.phoneme_ids(i, j) = s.phoneme_ids[j];
        b.pitch_ids(i, j) = s.note_pitch_ids[j];
        b.durations_frames(i, j) = s.note_durations_frames[j];
      }
    } else {
      for (Eigen::Index j = 0; j < p; ++j)
        b.phoneme_ids(i, j) = item.meta.phoneme_sequence[j];
    }
    b.symbol_mask.row(i).head(p).setOnes();
    const Eigen::Index ns = std::min(item.audio.size(), samples);
    b.waveforms.row(i).head(ns) = item.audio.samples.head(ns).transpose();
  }
  return b;
}

}  // namespace svs::score
