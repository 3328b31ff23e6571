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

#include "svs/trainer/toy_corpus.h"

#include <cmath>
#include <fstream>
#include <string>

#include "svs/core/rng.h"
#include "svs/dsp/audio.h"
#include "svs/dsp/pitch.h"
#include "svs/score/lexicon.h"
#include "svs/score/score.h"

namespace svs::trainer {

namespace {

struct Singer {
  std::string id;
  int low_midi;
  int high_midi;
  double tilt;
  double breath;
};

const std::vector<Singer>& singers() {
  static const std::vector<Singer> s = {
      {"A", 55, 67, 0.18, 0.002},
      {"B", 62, 74, 0.40, 0.006},
  };
  return s;
}

const std::vector<std::string>& syllables() {
  static const std::vector<std::string> s = {
      "ma", "mi", "mo", "la", "li", "lu", "na", "ni", "nu", "ba",
      "bo", "da", "di", "ge", "wo", "ai", "ou", "a", "o", "e"};
  return s;
}

bool is_murmur(const std::string& p) {
  return p == "m" || p == "n" || p == "l" || p == "w" || p == "y";
}

// Vowel-specific envelope over harmonics 1..8.
double vowel_gain(const std::string& vowel, int k) {
  unsigned h = 0;
  for (char ch : vowel) h = h * 31u + static_cast<unsigned char>(ch);
  const double c1 = 1.0 + static_cast<double>(h % 3);
  const double c2 = 3.5 + static_cast<double>((h / 3) % 4);
  return std::exp(-0.5 * (k - c1) * (k - c1)) +
         0.7 * std::exp(-0.5 * (k - c2) * (k - c2) / 1.5);
}

}  // namespace

ToyCorpusPaths make_toy_corpus(const std::filesystem::path& out_dir,
                               const ToyCorpusConfig& config) {
  require(config.singers >= 1 && config.singers <= static_cast<int>(singers().size()),
          "make_toy_corpus: between 1 and 2 singers supported");
  require(config.min_note_frames >= 8 && config.max_note_frames >= config.min_note_frames,
          "make_toy_corpus: invalid note length range");
  std::filesystem::create_directories(out_dir / "wavs");
  const score::PhonemeLexicon lexicon = score::PhonemeLexicon::standard();
  const score::SyllableTable g2p = score::SyllableTable::toy();
  const score::FrameTiming timing{config.sample_rate, config.hop};
  Rng rng(config.seed);

  ToyCorpusPaths paths;
  paths.pretrain_manifest = out_dir / "pretrain.tsv";
  paths.finetune_manifest = out_dir / "finetune.tsv";
  paths.finetune_single = out_dir / "finetune_one.tsv";
  std::ofstream pre(paths.pretrain_manifest), fine(paths.finetune_manifest),
      single(paths.finetune_single);
  require(pre.good() && fine.good() && single.good(),
          "make_toy_corpus: cannot write manifests in " + out_dir.string());

  const int hop = config.hop;
  const double sr = config.sample_rate;
  for (int s = 0; s < config.singers; ++s) {
    const Singer& singer = singers()[s];
    for (int u = 0; u < config.utterances_per_singer; ++u) {
      char name[32];
      std::snprintf(name, sizeof(name), "%s_%02d", singer.id.c_str(), u);
      score::MusicalScore sc;
      sc.utt_id = name;
      std::string lyrics;
      std::vector<int> note_pitch;
      std::vector<std::vector<std::string>> note_phones;
      std::vector<std::vector<int>> note_frames;
      for (int n = 0; n < config.notes_per_utterance; ++n) {
        const std::string& syl =
            syllables()[rng.uniform_int(0, syllables().size() - 1)];
        const int pitch =
            static_cast<int>(rng.uniform_int(singer.low_midi, singer.high_midi));
        const int frames = static_cast<int>(
            rng.uniform_int(config.min_note_frames, config.max_note_frames));
        const auto phones = g2p.convert(syl);
        std::vector<int> split;
        if (phones.size() == 2) {
          const int initial = static_cast<int>(rng.uniform_int(3, 5));
          split = {initial, frames - initial};
        } else {
          split = {frames};
        }
        lyrics += (n ? " " : "") + syl;
        note_pitch.push_back(pitch);
        note_phones.push_back(phones);
        note_frames.push_back(split);
        for (size_t k = 0; k < phones.size(); ++k) {
          sc.phoneme_ids.push_back(lexicon.id(phones[k]));
          sc.note_pitch_ids.push_back(pitch);
          sc.note_durations_frames.push_back(split[k]);
        }
      }
      sc.note_index = score::group_notes(sc.phoneme_ids, sc.note_pitch_ids, lexicon);

      // Audio: frame t of the score covers samples [t * hop, (t + 1) * hop).
      const int total_frames = sc.total_frames();
      const Eigen::Index samples = static_cast<Eigen::Index>(total_frames) * hop - hop / 2;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(samples);
      Eigen::Index at = 0;
      double phase = 0.0;
      for (size_t n = 0; n < note_phones.size(); ++n) {
        const double f0 = dsp::midi_to_hz<double>(note_pitch[n]);
        for (size_t k = 0; k < note_phones[n].size(); ++k) {
          const std::string& ph = note_phones[n][k];
          const Eigen::Index len = static_cast<Eigen::Index>(note_frames[n][k]) * hop;
          const bool vowel = k + 1 == note_phones[n].size();
          for (Eigen::Index i = 0; i < len && at + i < samples; ++i) {
            phase += 2.0 * M_PI * f0 / sr;
            const double fade = std::min(1.0, std::min(i, len - 1 - i) / (0.004 * sr));
            double v = 0.0;
            if (vowel || is_murmur(ph)) {
              const int kmax = vowel ? 8 : 2;
              for (int h = 1; h <= kmax && h * f0 < 0.45 * sr; ++h) {
                const double g = (vowel ? vowel_gain(ph, h) : 1.0 / h) *
                                 std::exp(-singer.tilt * (h - 1));
                v += g * std::sin(h * phase);
              }
              v *= vowel ? 0.12 : 0.08;
              v += singer.breath * rng.normal();
            } else {
              v = (ph == "sh" ? 0.05 : 0.08) * rng.normal();
              if (i < len / 3) v = 0.0;  // stop closure
            }
            x(at + i) = v * fade;
          }
          at += len;
        }
      }
      dsp::AudioClip clip{x, config.sample_rate};
      const std::filesystem::path rel = std::filesystem::path("wavs") / (std::string(name) + ".wav");
      dsp::write_wav(out_dir / rel, clip);
      paths.wavs.push_back(out_dir / rel);
      paths.total_seconds += static_cast<double>(samples) / sr;

      pre << rel.string() << '\t' << singer.id << '\t' << lyrics << '\n';
      if (s == 0) {
        const std::string ann = score::serialize_annotation(sc, lexicon, timing);
        fine << rel.string() << '\t' << singer.id << '\t' << ann << '\n';
        if (u == 0) single << rel.string() << '\t' << singer.id << '\t' << ann << '\n';
      }
    }
  }
  return paths;
}

}  // namespace svs::trainer
