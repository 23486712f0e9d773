// promdec/prominence.hpp

// Copyright 2026 The promdec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "promdec/corpus.hpp"
#include "promdec/error.hpp"
#include "promdec/textio.hpp"
#include "promdec/vocab.hpp"

namespace promdec {

/// A word-level prominence decision; nullopt means Unassigned.
using LevelHyp = std::optional<ProminenceLevel>;

/// Tokens between two boundaries, plus the tag digits they carry.
struct WordSegment {
  std::vector<Token> tokens;
  std::string tag_string;
};

inline std::vector<WordSegment> segment_words(std::span<const Token> hyp) {
  std::vector<WordSegment> out;
  WordSegment cur;
  auto flush = [&] {
    if (!cur.tokens.empty()) out.push_back(std::move(cur));
    cur = WordSegment{};
  };
  for (const auto& t : hyp) {
    if (t.is_blank()) throw InputError("segment_words: hypothesis contains <blank>");
    if (t.is_boundary()) {
      flush();
      continue;
    }
    cur.tokens.push_back(t);
    if (t.tag) cur.tag_string.push_back(level_digit(*t.tag));
  }
  flush();
  return out;
}

/// Strict plurality vote over the tag digits; ties and untagged segments
/// give Unassigned.
inline LevelHyp extract_level(const WordSegment& seg) {
  std::array<int, 3> votes{};
  for (char c : seg.tag_string) {
    if (auto l = level_from_digit(static_cast<char32_t>(c))) ++votes[level_index(*l)];
  }
  int best = -1;
  int best_votes = 0;
  bool tie = false;
  for (int l = 0; l < 3; ++l) {
    if (votes[l] > best_votes) {
      best = l;
      best_votes = votes[l];
      tie = false;
    } else if (votes[l] == best_votes && votes[l] > 0) {
      tie = true;
    }
  }
  if (best < 0 || tie) return std::nullopt;
  return static_cast<ProminenceLevel>(best);
}

inline std::vector<LevelHyp> extract_sequence(std::span<const Token> hyp) {
  std::vector<LevelHyp> out;
  for (const auto& seg : segment_words(hyp)) out.push_back(extract_level(seg));
  return out;
}

inline std::vector<LevelHyp> extract_sequence(std::string_view hyp, TaggingMode mode) {
  const auto tokens = parse_tokens(hyp, mode);
  return extract_sequence(std::span<const Token>(tokens));
}

inline std::vector<LevelHyp> to_level_hyps(const std::vector<ProminenceLevel>& levels) {
  return {levels.begin(), levels.end()};
}

// Prominence file: "id TAB 0 2 ?" with "?" for Unassigned.

inline std::string render_levels(std::span<const LevelHyp> levels) {
  std::string out;
  for (const auto& l : levels) {
    if (!out.empty()) out.push_back(' ');
    out.push_back(l ? level_digit(*l) : '?');
  }
  return out;
}

inline std::vector<LevelHyp> parse_levels(std::string_view text) {
  std::vector<LevelHyp> out;
  for (const auto& f : textio::split_fields(text)) {
    if (f == "?") {
      out.emplace_back();
    } else if (f.size() == 1 && level_from_digit(static_cast<char32_t>(f[0]))) {
      out.push_back(level_from_digit(static_cast<char32_t>(f[0])));
    } else {
      throw ParseError("invalid prominence level \"" + f + "\"");
    }
  }
  return out;
}

struct LevelRecord {
  std::string id;
  std::vector<LevelHyp> levels;
};

inline void write_levels(const std::vector<LevelRecord>& rows, const std::filesystem::path& path) {
  std::vector<textio::TsvRecord> tsv;
  for (const auto& r : rows) tsv.emplace_back(r.id, render_levels(r.levels));
  textio::write_tsv(path, tsv);
}

inline std::vector<LevelRecord> read_levels(const std::filesystem::path& path) {
  std::vector<LevelRecord> out;
  std::size_t n = 0;
  for (auto& [id, text] : textio::read_tsv(path)) {
    ++n;
    try {
      out.push_back({id, parse_levels(text)});
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), n);
    }
  }
  return out;
}

}  // namespace promdec
