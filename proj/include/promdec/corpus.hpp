// promdec/corpus.hpp

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

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "promdec/error.hpp"
#include "promdec/textio.hpp"
#include "promdec/unicode.hpp"

namespace promdec {

// Annotated level 3 (emphatic) never survives parsing; it is folded into PL2.
enum class ProminenceLevel : std::uint8_t { PL0 = 0, PL1 = 1, PL2 = 2 };

inline constexpr std::array<ProminenceLevel, 3> kAllLevels = {
    ProminenceLevel::PL0, ProminenceLevel::PL1, ProminenceLevel::PL2};

inline char level_digit(ProminenceLevel l) {
  return static_cast<char>('0' + static_cast<int>(l));
}

inline int level_index(ProminenceLevel l) { return static_cast<int>(l); }

inline std::optional<ProminenceLevel> level_from_digit(char32_t c) {
  switch (c) {
    case '0': return ProminenceLevel::PL0;
    case '1': return ProminenceLevel::PL1;
    case '2': return ProminenceLevel::PL2;
    default: return std::nullopt;
  }
}

inline ProminenceLevel collapse_level(int raw) {
  switch (raw) {
    case 0: return ProminenceLevel::PL0;
    case 1: return ProminenceLevel::PL1;
    case 2:
    case 3: return ProminenceLevel::PL2;
    default:
      throw InputError("prominence level out of range 0..3: " + std::to_string(raw));
  }
}

// ---------------------------------------------------------------------------
// Tagging modes

enum class TaggingMode { Baseline, Tag0, Tag2, Tag02, Tag012, Det02, Det012 };

inline constexpr std::array<TaggingMode, 7> kAllModes = {
    TaggingMode::Baseline, TaggingMode::Tag0,  TaggingMode::Tag2,  TaggingMode::Tag02,
    TaggingMode::Tag012,   TaggingMode::Det02, TaggingMode::Det012};

inline std::string_view mode_name(TaggingMode m) {
  switch (m) {
    case TaggingMode::Baseline: return "Baseline";
    case TaggingMode::Tag0: return "Tag0";
    case TaggingMode::Tag2: return "Tag2";
    case TaggingMode::Tag02: return "Tag02";
    case TaggingMode::Tag012: return "Tag012";
    case TaggingMode::Det02: return "Det02";
    case TaggingMode::Det012: return "Det012";
  }
  return "?";
}

inline TaggingMode parse_mode(std::string_view name) {
  std::string low;
  for (char c : name) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (TaggingMode m : kAllModes) {
    std::string n;
    for (char c : mode_name(m)) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (n == low) return m;
  }
  throw InputError("unknown tagging mode: " + std::string(name));
}

inline bool is_detector_mode(TaggingMode m) {
  return m == TaggingMode::Det02 || m == TaggingMode::Det012;
}

/// Levels that a mode renders. For Tag* modes these are the levels whose
/// characters receive a digit suffix; for Det* modes the levels a detector
/// may emit.
inline bool mode_uses_level(TaggingMode m, ProminenceLevel l) {
  switch (m) {
    case TaggingMode::Baseline: return false;
    case TaggingMode::Tag0: return l == ProminenceLevel::PL0;
    case TaggingMode::Tag2: return l == ProminenceLevel::PL2;
    case TaggingMode::Tag02:
    case TaggingMode::Det02: return l != ProminenceLevel::PL1;
    case TaggingMode::Tag012:
    case TaggingMode::Det012: return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Data model

struct ProsodicWord {
  std::vector<std::string> tokens;
  std::optional<ProminenceLevel> level;

  void validate() const {
    if (tokens.empty()) throw InputError("prosodic word without tokens");
    for (const auto& t : tokens) {
      if (t.empty()) throw InputError("empty orthographic token");
      for (char32_t cp : unicode::decode(t)) {
        if (cp == U'|' || unicode::is_space(cp)) {
          throw InputError("orthographic token contains '|' or white space: \"" + t + "\"");
        }
      }
    }
  }

  friend bool operator==(const ProsodicWord&, const ProsodicWord&) = default;
};

enum class ExclusionFlag { Laughter, Singing, Onomatopoeia, Unintelligible, Artefact };

inline std::string_view flag_name(ExclusionFlag f) {
  switch (f) {
    case ExclusionFlag::Laughter: return "laughter";
    case ExclusionFlag::Singing: return "singing";
    case ExclusionFlag::Onomatopoeia: return "onomatopoeia";
    case ExclusionFlag::Unintelligible: return "unintelligible";
    case ExclusionFlag::Artefact: return "artefact";
  }
  return "?";
}

inline ExclusionFlag parse_flag(std::string_view s) {
  for (auto f : {ExclusionFlag::Laughter, ExclusionFlag::Singing, ExclusionFlag::Onomatopoeia,
                 ExclusionFlag::Unintelligible, ExclusionFlag::Artefact}) {
    if (flag_name(f) == s) return f;
  }
  throw InputError("unknown exclusion flag: " + std::string(s));
}

struct Utterance {
  std::string id;
  std::string conversation_id;
  std::string speaker_id;
  std::vector<ProsodicWord> prosodic_words;
  std::set<ExclusionFlag> exclusion_flags;

  /// Orthographic words in order, ignoring prosodic grouping.
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    for (const auto& pw : prosodic_words) out.insert(out.end(), pw.tokens.begin(), pw.tokens.end());
    return out;
  }

  /// One level per orthographic word, copied from its prosodic word.
  std::vector<std::optional<ProminenceLevel>> word_levels() const {
    std::vector<std::optional<ProminenceLevel>> out;
    for (const auto& pw : prosodic_words) out.insert(out.end(), pw.tokens.size(), pw.level);
    return out;
  }

  std::vector<std::optional<ProminenceLevel>> prosodic_levels() const {
    std::vector<std::optional<ProminenceLevel>> out;
    for (const auto& pw : prosodic_words) out.push_back(pw.level);
    return out;
  }

  bool fully_annotated() const {
    return std::all_of(prosodic_words.begin(), prosodic_words.end(),
                       [](const ProsodicWord& pw) { return pw.level.has_value(); });
  }

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Utterance> utterances) : utterances_(std::move(utterances)) {
    std::unordered_set<std::string> seen;
    for (const auto& u : utterances_) {
      if (!seen.insert(u.id).second) throw InputError("duplicate utterance id: " + u.id);
      for (const auto& pw : u.prosodic_words) pw.validate();
    }
  }

  const std::vector<Utterance>& utterances() const { return utterances_; }
  std::size_t size() const { return utterances_.size(); }
  bool empty() const { return utterances_.empty(); }
  auto begin() const { return utterances_.begin(); }
  auto end() const { return utterances_.end(); }

  const Utterance* find(std::string_view id) const {
    for (const auto& u : utterances_) {
      if (u.id == id) return &u;
    }
    return nullptr;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<Utterance> utterances_;
};

// ---------------------------------------------------------------------------
// Text normalization

namespace detail {

inline bool is_backchannel(std::u32string_view tok) {
  return tok == U"mh" || tok == U"hm" || tok == U"mmh" || tok == U"hhm";
}

}  // namespace detail

/// Lowercases, maps backchannels (mh, hm, mmh, hhm, "uh huh") to "mhm",
/// strips punctuation and symbols (except "|") and collapses white space.
///
/// Backchannels are matched on whitespace-delimited tokens after lowercasing
/// and after stripping each token's punctuation, so "Uh huh," matches;
/// tokens that consist only of punctuation vanish before matching.
inline std::string normalize_text(std::string_view raw) {
  std::vector<std::u32string> tokens;
  for (auto& tok : unicode::split_whitespace(unicode::decode(raw))) {
    std::u32string clean;
    for (char32_t cp : tok) {
      cp = unicode::to_lower(cp);
      if (!unicode::is_punctuation_or_symbol(cp)) clean.push_back(cp);
    }
    if (!clean.empty()) tokens.push_back(std::move(clean));
  }
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::u32string_view tok = tokens[i];
    if (tok == U"uh" && i + 1 < tokens.size() && tokens[i + 1] == U"huh") {
      tok = U"mhm";
      ++i;
    } else if (detail::is_backchannel(tok)) {
      tok = U"mhm";
    }
    if (!out.empty()) out.push_back(' ');
    out += unicode::encode(tok);
  }
  return out;
}

/// Normalizes the orthography of every prosodic word. Prosodic words whose
/// tokens all normalize away are dropped.
inline Utterance normalize_utterance(Utterance utt) {
  std::vector<ProsodicWord> words;
  for (auto& pw : utt.prosodic_words) {
    std::string joined;
    for (const auto& t : pw.tokens) {
      if (!joined.empty()) joined.push_back(' ');
      joined += t;
    }
    ProsodicWord out{textio::split_fields(normalize_text(joined)), pw.level};
    if (!out.tokens.empty()) words.push_back(std::move(out));
  }
  utt.prosodic_words = std::move(words);
  return utt;
}

inline Corpus normalize_corpus(const Corpus& corpus) {
  std::vector<Utterance> out;
  out.reserve(corpus.size());
  for (const auto& u : corpus) out.push_back(normalize_utterance(u));
  return Corpus(std::move(out));
}

inline Corpus filter_corpus(const Corpus& corpus) {
  std::vector<Utterance> kept;
  for (const auto& u : corpus) {
    if (u.exclusion_flags.empty()) kept.push_back(u);
  }
  return Corpus(std::move(kept));
}

// ---------------------------------------------------------------------------
// Reference strings

/// "|L |L |" with one level digit per prosodic word.
inline std::string detector_reference(const Utterance& utt, TaggingMode mode) {
  if (!is_detector_mode(mode)) {
    throw ModeError("detector_reference needs Det02 or Det012, got " + std::string(mode_name(mode)));
  }
  std::string out = "|";
  for (std::size_t i = 0; i < utt.prosodic_words.size(); ++i) {
    const auto& level = utt.prosodic_words[i].level;
    if (!level) {
      throw IncompleteAnnotationError("utterance " + utt.id + ": prosodic word " +
                                      std::to_string(i) + " has no prominence level");
    }
    if (!mode_uses_level(mode, *level)) {
      throw ModeError("utterance " + utt.id + ": level " + std::string(1, level_digit(*level)) +
                      " not representable in " + std::string(mode_name(mode)));
    }
    out.push_back(level_digit(*level));
    out += " |";
  }
  return out;
}

/// Space-separated characters per orthographic word, words delimited by "|".
/// Characters of words whose level the mode tags carry the level digit.
inline std::string asr_reference(const Utterance& utt, TaggingMode mode) {
  if (is_detector_mode(mode)) {
    throw ModeError("asr_reference needs Baseline or a Tag mode, got " +
                    std::string(mode_name(mode)));
  }
  std::string out = "|";
  for (const auto& pw : utt.prosodic_words) {
    const bool tagged = pw.level && mode_uses_level(mode, *pw.level);
    for (const auto& word : pw.tokens) {
      bool first = true;
      for (char32_t cp : unicode::decode(word)) {
        if (!first) out.push_back(' ');
        first = false;
        unicode::append_utf8(out, cp);
        if (tagged) out.push_back(level_digit(*pw.level));
      }
      out += " |";
    }
  }
  return out;
}

inline std::string reference_for(const Utterance& utt, TaggingMode mode) {
  return is_detector_mode(mode) ? detector_reference(utt, mode) : asr_reference(utt, mode);
}

/// Applies detector output to an utterance only when it agrees with the
/// forced-alignment word count and every detected word carries a level.
inline std::optional<std::vector<ProminenceLevel>> project_annotations(
    const std::vector<std::optional<ProminenceLevel>>& detector_hyp,
    std::size_t forced_word_count) {
  if (detector_hyp.size() != forced_word_count) return std::nullopt;
  std::vector<ProminenceLevel> out;
  out.reserve(detector_hyp.size());
  for (const auto& l : detector_hyp) {
    if (!l) return std::nullopt;
    out.push_back(*l);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON Lines I/O

inline nlohmann::json to_json(const Utterance& u) {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& pw : u.prosodic_words) {
    nlohmann::json w;
    w["tokens"] = pw.tokens;
    w["level"] = pw.level ? nlohmann::json(level_index(*pw.level)) : nlohmann::json(nullptr);
    words.push_back(std::move(w));
  }
  nlohmann::json flags = nlohmann::json::array();
  for (auto f : u.exclusion_flags) flags.push_back(std::string(flag_name(f)));
  nlohmann::json j;
  j["id"] = u.id;
  j["conversation"] = u.conversation_id;
  j["speaker"] = u.speaker_id;
  j["words"] = std::move(words);
  j["flags"] = std::move(flags);
  return j;
}

inline Utterance utterance_from_json(const nlohmann::json& j) {
  Utterance u;
  u.id = j.at("id").get<std::string>();
  u.conversation_id = j.at("conversation").get<std::string>();
  u.speaker_id = j.at("speaker").get<std::string>();
  for (const auto& w : j.at("words")) {
    ProsodicWord pw;
    pw.tokens = w.at("tokens").get<std::vector<std::string>>();
    if (w.contains("level") && !w.at("level").is_null()) {
      pw.level = collapse_level(w.at("level").get<int>());
    }
    pw.validate();
    u.prosodic_words.push_back(std::move(pw));
  }
  if (j.contains("flags")) {
    for (const auto& f : j.at("flags")) u.exclusion_flags.insert(parse_flag(f.get<std::string>()));
  }
  if (u.id.empty()) throw InputError("empty utterance id");
  return u;
}

inline Corpus read_corpus(const std::filesystem::path& path) {
  std::vector<Utterance> utts;
  std::size_t lineno = 0;
  for (const auto& line : textio::read_lines(path)) {
    ++lineno;
    if (textio::trim(line).empty()) continue;
    try {
      utts.push_back(utterance_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    } catch (const InputError& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
  }
  try {
    return Corpus(std::move(utts));
  } catch (const InputError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = textio::open_out(path);
  for (const auto& u : corpus) out << to_json(u).dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace promdec
