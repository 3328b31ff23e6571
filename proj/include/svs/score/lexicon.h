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

#ifndef SVS_SCORE_LEXICON_H_
#define SVS_SCORE_LEXICON_H_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "svs/core/types.h"

namespace svs::score {

inline constexpr int kBlankId = 0;
inline constexpr const char* kBlankSymbol = "<blank>";

// Phoneme inventory with the CTC blank reserved at index 0. Symbols flagged
// as initials (syllable-onset consonants) share a note with the phoneme that
// follows them.
class PhonemeLexicon {
 public:
  PhonemeLexicon(std::vector<std::string> symbols,
                 std::set<std::string> initials);

  // The bundled 61-symbol Mandarin-style inventory (23 initials, 36 finals,
  // AP breath and SP silence).
  static PhonemeLexicon standard();
  // One symbol per line, optionally followed by whitespace and "initial".
  static PhonemeLexicon load(const std::filesystem::path& path);

  int id(const std::string& symbol) const;  // throws "unknown phoneme"
  bool contains(const std::string& symbol) const;
  const std::string& symbol(int id) const;
  bool is_initial(int id) const;

  int vocab_size() const { return static_cast<int>(symbols_.size()) - 1; }
  int class_count() const { return static_cast<int>(symbols_.size()); }

 private:
  std::vector<std::string> symbols_;  // symbols_[0] is the blank
  std::map<std::string, int> index_;
  std::vector<bool> initial_;
};

class GraphemeToPhoneme {
 public:
  virtual ~GraphemeToPhoneme() = default;
  // Throws when the grapheme has no mapping.
  virtual std::vector<std::string> convert(const std::string& grapheme) const = 0;
};

// Table-driven converter: each whitespace-separated syllable maps to a fixed
// phoneme string.
class SyllableTable : public GraphemeToPhoneme {
 public:
  explicit SyllableTable(std::map<std::string, std::vector<std::string>> table);

  // Small pinyin table used by the synthetic corpus and the tests.
  static SyllableTable toy();
  // Lines of "syllable phoneme phoneme ...".
  static SyllableTable load(const std::filesystem::path& path);

  std::vector<std::string> convert(const std::string& grapheme) const override;
  const std::map<std::string, std::vector<std::string>>& entries() const {
    return table_;
  }

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

// Lyrics (whitespace-separated graphemes) to phoneme ids. Errors list every
// unmappable grapheme.
std::vector<int> lyrics_to_phonemes(const std::string& text,
                                    const PhonemeLexicon& lexicon,
                                    const GraphemeToPhoneme& g2p);

std::vector<std::string> split_whitespace(const std::string& text);

}  // namespace svs::score

#endif  // SVS_SCORE_LEXICON_H_
