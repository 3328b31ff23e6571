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

#include "svs/score/score.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace svs::score {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == '|') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r' && c != '\n') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

[[noreturn]] void fail(const std::string& line, const std::string& field,
                       const std::string& what) {
  throw Error("annotation '" + line + "': field '" + field + "': " + what);
}

}  // namespace

int FrameTiming::seconds_to_frames(double seconds) const {
  const double frames = seconds * sample_rate / hop;
  return std::max(1, static_cast<int>(std::floor(frames + 0.5)));
}

double FrameTiming::frames_to_seconds(int frames) const {
  return static_cast<double>(frames) * hop / sample_rate;
}

int MusicalScore::total_frames() const {
  return std::accumulate(note_durations_frames.begin(),
                         note_durations_frames.end(), 0);
}

int MusicalScore::note_count() const {
  return note_index.empty() ? 0 : note_index.back() + 1;
}

std::vector<int> MusicalScore::note_lengths_per_phoneme() const {
  std::vector<int> per_note(static_cast<size_t>(note_count()), 0);
  for (size_t i = 0; i < size(); ++i)
    per_note[static_cast<size_t>(note_index[i])] += note_durations_frames[i];
  std::vector<int> out(size());
  for (size_t i = 0; i < size(); ++i)
    out[i] = per_note[static_cast<size_t>(note_index[i])];
  return out;
}

void MusicalScore::validate(int vocab_size) const {
  const size_t p = phoneme_ids.size();
  require(p > 0, "score has no phonemes");
  require(note_pitch_ids.size() == p && note_durations_frames.size() == p &&
              note_index.size() == p,
          "score field lengths differ");
  for (size_t i = 0; i < p; ++i) {
    require(phoneme_ids[i] >= 1 && phoneme_ids[i] <= vocab_size,
            "phoneme id out of range");
    require(note_pitch_ids[i] >= 0 && note_pitch_ids[i] <= 127,
            "note pitch id out of range");
    require(note_durations_frames[i] > 0, "non-positive duration");
    require(i == 0 ? note_index[i] == 0
                   : (note_index[i] == note_index[i - 1] ||
                      note_index[i] == note_index[i - 1] + 1),
            "note indices must be contiguous");
  }
}

std::vector<int> group_notes(const std::vector<int>& phoneme_ids,
                             const std::vector<int>& pitches,
                             const PhonemeLexicon& lexicon) {
  std::vector<int> groups(phoneme_ids.size(), 0);
  for (size_t i = 1; i < phoneme_ids.size(); ++i) {
    const bool joins =
        lexicon.is_initial(phoneme_ids[i - 1]) && pitches[i] == pitches[i - 1];
    groups[i] = groups[i - 1] + (joins ? 0 : 1);
  }
  return groups;
}

MusicalScore parse_annotation(const std::string& line,
                              const PhonemeLexicon& lexicon,
                              const FrameTiming& timing) {
  const auto fields = split_fields(line);
  if (fields.size() < 4)
    fail(line, "line", "expected 4 '|'-separated fields, got " +
                           std::to_string(fields.size()));
  MusicalScore score;
  score.utt_id = split_whitespace(fields[0]).empty()
                     ? std::string()
                     : split_whitespace(fields[0]).front();
  if (score.utt_id.empty()) fail(line, "utt_id", "empty utterance id");

  const auto phones = split_whitespace(fields[1]);
  const auto notes = split_whitespace(fields[2]);
  const auto durs = split_whitespace(fields[3]);
  if (phones.empty()) fail(line, "phonemes", "no phonemes");
  if (notes.size() != phones.size())
    fail(line, "midi-notes", "token count " + std::to_string(notes.size()) +
                                 " != phoneme count " +
                                 std::to_string(phones.size()));
  if (durs.size() != phones.size())
    fail(line, "durations-sec", "token count " + std::to_string(durs.size()) +
                                    " != phoneme count " +
                                    std::to_string(phones.size()));

  for (const auto& p : phones) {
    if (!lexicon.contains(p)) fail(line, "phonemes", "unknown phoneme '" + p + "'");
    score.phoneme_ids.push_back(lexicon.id(p));
  }
  for (const auto& n : notes) {
    int value = -1;
    auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), value);
    if (ec != std::errc() || ptr != n.data() + n.size() || value < 0 ||
        value > 127)
      fail(line, "midi-notes", "invalid MIDI note '" + n + "'");
    score.note_pitch_ids.push_back(value);
  }
  for (const auto& d : durs) {
    double seconds = 0.0;
    try {
      size_t used = 0;
      seconds = std::stod(d, &used);
      if (used != d.size()) throw std::invalid_argument(d);
    } catch (const std::exception&) {
      fail(line, "durations-sec", "invalid duration '" + d + "'");
    }
    if (!std::isfinite(seconds) || seconds <= 0.0)
      fail(line, "durations-sec", "non-positive duration '" + d + "'");
    score.note_durations_frames.push_back(timing.seconds_to_frames(seconds));
  }
  score.note_index = group_notes(score.phoneme_ids, score.note_pitch_ids, lexicon);
  return score;
}

std::string serialize_annotation(const MusicalScore& score,
                                 const PhonemeLexicon& lexicon,
                                 const FrameTiming& timing) {
  std::ostringstream out;
  out << score.utt_id << '|';
  for (size_t i = 0; i < score.size(); ++i)
    out << (i ? " " : "") << lexicon.symbol(score.phoneme_ids[i]);
  out << '|';
  for (size_t i = 0; i < score.size(); ++i)
    out << (i ? " " : "") << score.note_pitch_ids[i];
  out << '|';
  char buf[32];
  for (size_t i = 0; i < score.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g",
                  timing.frames_to_seconds(score.note_durations_frames[i]));
    out << (i ? " " : "") << buf;
  }
  return out.str();
}

void absorb_residual(MusicalScore& score, int frames) {
  require(!score.note_durations_frames.empty(), "score has no phonemes");
  const int residual = frames - score.total_frames();
  int& last = score.note_durations_frames.back();
  require(last + residual > 0,
          "score '" + score.utt_id + "' is longer than its audio by " +
              std::to_string(-residual) + " frames");
  last += residual;
}

}  // namespace svs::score
