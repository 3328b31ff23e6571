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

#include "svs/score/lexicon.h"

#include <fstream>
#include <sstream>

namespace svs::score {

PhonemeLexicon::PhonemeLexicon(std::vector<std::string> symbols,
                               std::set<std::string> initials) {
  symbols_.push_back(kBlankSymbol);
  initial_.push_back(false);
  index_[kBlankSymbol] = kBlankId;
  for (auto& s : symbols) {
    require(!s.empty(), "empty phoneme symbol");
    require(!index_.count(s), "duplicate phoneme symbol: " + s);
    index_[s] = static_cast<int>(symbols_.size());
    initial_.push_back(initials.count(s) > 0);
    symbols_.push_back(std::move(s));
  }
}

PhonemeLexicon PhonemeLexicon::standard() {
  const std::vector<std::string> initials = {
      "b", "p", "m", "f", "d", "t",  "n",  "l",  "g", "k", "h", "j",
      "q", "x", "zh", "ch", "sh", "r", "z", "c", "s", "y", "w"};
  const std::vector<std::string> finals = {
      "a",  "ai",  "an",  "ang",  "ao",  "e",  "ei",  "en",  "eng",
      "er", "i",   "ia",  "ian",  "iang", "iao", "ie",  "in",  "ing",
      "iong", "iu", "ix", "o",   "ong",  "ou",  "u",   "ua",  "uai",
      "uan", "uang", "ui", "un", "uo",   "v",   "van", "ve",  "vn"};
  std::vector<std::string> all = initials;
  all.insert(all.end(), finals.begin(), finals.end());
  all.push_back("AP");
  all.push_back("SP");
  return PhonemeLexicon(all, {initials.begin(), initials.end()});
}

PhonemeLexicon PhonemeLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open lexicon: " + path.string());
  std::vector<std::string> symbols;
  std::set<std::string> initials;
  std::string line;
  while (std::getline(in, line)) {
    const auto tokens = split_whitespace(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    symbols.push_back(tokens[0]);
    if (tokens.size() > 1 && tokens[1] == "initial") initials.insert(tokens[0]);
  }
  return PhonemeLexicon(symbols, initials);
}

int PhonemeLexicon::id(const std::string& symbol) const {
  auto it = index_.find(symbol);
  require(it != index_.end() && it->second != kBlankId,
          "unknown phoneme '" + symbol + "'");
  return it->second;
}

bool PhonemeLexicon::contains(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it != index_.end() && it->second != kBlankId;
}

const std::string& PhonemeLexicon::symbol(int id) const {
  require(id >= 0 && id < class_count(), "phoneme id out of range");
  return symbols_[static_cast<size_t>(id)];
}

bool PhonemeLexicon::is_initial(int id) const {
  return id > 0 && id < class_count() && initial_[static_cast<size_t>(id)];
}

SyllableTable::SyllableTable(
    std::map<std::string, std::vector<std::string>> table)
    : table_(std::move(table)) {}

SyllableTable SyllableTable::toy() {
  return SyllableTable({
      {"a", {"a"}},           {"o", {"o"}},         {"e", {"e"}},
      {"ma", {"m", "a"}},     {"mi", {"m", "i"}},   {"mo", {"m", "o"}},
      {"la", {"l", "a"}},     {"li", {"l", "i"}},   {"lu", {"l", "u"}},
      {"na", {"n", "a"}},     {"ni", {"n", "i"}},   {"nu", {"n", "u"}},
      {"ba", {"b", "a"}},     {"bo", {"b", "o"}},   {"da", {"d", "a"}},
      {"di", {"d", "i"}},     {"ge", {"g", "e"}},   {"wo", {"w", "o"}},
      {"ai", {"ai"}},         {"ou", {"ou"}},       {"shang", {"sh", "ang"}},
      {"ming", {"m", "ing"}}, {"yue", {"y", "ve"}}, {"AP", {"AP"}},
      {"SP", {"SP"}},
  });
}

SyllableTable SyllableTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open syllable table: " + path.string());
  std::map<std::string, std::vector<std::string>> table;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_whitespace(line);
    if (tokens.size() < 2 || tokens[0][0] == '#') continue;
    table[tokens[0]] = {tokens.begin() + 1, tokens.end()};
  }
  return SyllableTable(std::move(table));
}

std::vector<std::string> SyllableTable::convert(
    const std::string& grapheme) const {
  auto it = table_.find(grapheme);
  require(it != table_.end(), "unmappable grapheme: " + grapheme);
  return it->second;
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

std::vector<int> lyrics_to_phonemes(const std::string& text,
                                    const PhonemeLexicon& lexicon,
                                    const GraphemeToPhoneme& g2p) {
  const auto graphemes = split_whitespace(text);
  require(!graphemes.empty(), "empty lyrics");
  std::vector<int> ids;
  std::string unmapped;
  for (const auto& g : graphemes) {
    std::vector<std::string> phones;
    try {
      phones = g2p.convert(g);
    } catch (const Error&) {
      unmapped += (unmapped.empty() ? "" : ", ") + g;
      continue;
    }
    for (const auto& p : phones) ids.push_back(lexicon.id(p));
  }
  require(unmapped.empty(), "unmappable grapheme(s): " + unmapped);
  require(!ids.empty(), "empty lyrics");
  return ids;
}

}  // namespace svs::score
