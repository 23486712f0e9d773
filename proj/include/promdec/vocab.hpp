// promdec/vocab.hpp

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
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "promdec/corpus.hpp"
#include "promdec/error.hpp"
#include "promdec/textio.hpp"
#include "promdec/unicode.hpp"

namespace promdec {

using TokenId = std::uint32_t;

/// One CTC output symbol.
///
/// Char tokens carry a base character and, in tagged alphabets, a level.
/// Level tokens are the bare digits of detector alphabets ("|0 |2 |").
struct Token {
  enum class Kind : std::uint8_t { Blank = 0, Boundary = 1, Level = 2, Char = 3 };

  Kind kind = Kind::Blank;
  char32_t base = 0;
  std::optional<ProminenceLevel> tag;

  static Token blank() { return {}; }
  static Token boundary() { return {Kind::Boundary, 0, std::nullopt}; }
  static Token level(ProminenceLevel l) { return {Kind::Level, 0, l}; }
  static Token character(char32_t c, std::optional<ProminenceLevel> t = std::nullopt) {
    return {Kind::Char, c, t};
  }

  bool is_blank() const { return kind == Kind::Blank; }
  bool is_boundary() const { return kind == Kind::Boundary; }
  bool is_char() const { return kind == Kind::Char; }
  bool is_level() const { return kind == Kind::Level; }

  std::string text() const {
    switch (kind) {
      case Kind::Blank: return "<blank>";
      case Kind::Boundary: return "|";
      case Kind::Level: return std::string(1, level_digit(*tag));
      case Kind::Char: {
        std::string s = unicode::encode(base);
        if (tag) s.push_back(level_digit(*tag));
        return s;
      }
    }
    return {};
  }

  // Canonical order: Blank, Boundary, Level tokens, then characters by
  // (base, untagged first, tag).
  friend auto operator<=>(const Token& a, const Token& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.base <=> b.base; c != 0) return c;
    const int ta = a.tag ? level_index(*a.tag) : -1;
    const int tb = b.tag ? level_index(*b.tag) : -1;
    return ta <=> tb;
  }
  friend bool operator==(const Token&, const Token&) = default;
};

inline Token strip_tag(const Token& t) {
  if (t.is_char()) return Token::character(t.base);
  return t;
}

// ---------------------------------------------------------------------------
// Parsing of reference / hypothesis strings

namespace detail {

inline Token parse_symbol(std::u32string_view sym, TaggingMode mode) {
  const std::string text = unicode::encode(sym);
  if (is_detector_mode(mode)) {
    if (sym.size() == 1) {
      if (auto l = level_from_digit(sym[0]); l && mode_uses_level(mode, *l)) return Token::level(*l);
    }
    throw ParseError("invalid detector symbol \"" + text + "\" for " + std::string(mode_name(mode)));
  }
  if (sym.size() == 1) {
    if (mode != TaggingMode::Baseline && unicode::is_ascii_digit(sym[0])) {
      throw ParseError("tag digit without a preceding character in " + std::string(mode_name(mode)));
    }
    return Token::character(sym[0]);
  }
  if (sym.size() == 2 && mode != TaggingMode::Baseline && unicode::is_ascii_digit(sym[1])) {
    auto l = level_from_digit(sym[1]);
    if (!l || !mode_uses_level(mode, *l)) {
      throw ParseError("unknown tag digit in \"" + text + "\" for " + std::string(mode_name(mode)));
    }
    return Token::character(sym[0], *l);
  }
  throw ParseError("malformed token \"" + text + "\" for " + std::string(mode_name(mode)));
}

}  // namespace detail

/// Parses the rendering used by references and Lexfree hypotheses. Blanks
/// separate symbols; "|" is a token of its own whether or not it is
/// attached to a neighbouring symbol.
inline std::vector<Token> parse_tokens(std::string_view text, TaggingMode mode) {
  std::vector<Token> out;
  for (const auto& piece : unicode::split_whitespace(unicode::decode(text))) {
    std::size_t i = 0;
    while (i < piece.size()) {
      if (piece[i] == U'|') {
        out.push_back(Token::boundary());
        ++i;
        continue;
      }
      std::size_t j = piece.find(U'|', i);
      if (j == std::u32string::npos) j = piece.size();
      out.push_back(detail::parse_symbol(std::u32string_view(piece).substr(i, j - i), mode));
      i = j;
    }
  }
  return out;
}

/// Inverse of parse_tokens for Blank-free sequences: "|d0 i0 e0 |".
inline std::string render_tokens(const std::vector<Token>& tokens) {
  std::string out;
  bool after_boundary = true;
  for (const auto& t : tokens) {
    if (t.is_blank()) continue;
    if (!out.empty() && !after_boundary) out.push_back(' ');
    out += t.text();
    after_boundary = t.is_boundary();
  }
  return out;
}

// ---------------------------------------------------------------------------
// TokenSet

class TokenSet {
 public:
  TokenSet() : TokenSet(std::vector<Token>{Token::blank(), Token::boundary()}) {}

  /// Tokens in id order, as read from a vocab file or a model head.
  explicit TokenSet(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty() || !tokens_[0].is_blank()) throw InputError("token 0 must be <blank>");
    std::size_t boundaries = 0;
    for (TokenId i = 0; i < tokens_.size(); ++i) {
      const Token& t = tokens_[i];
      if (t.is_blank() && i != 0) throw InputError("<blank> occurs more than once");
      if (t.is_boundary()) {
        ++boundaries;
        boundary_ = i;
      }
      if (!index_.emplace(t, i).second) throw InputError("duplicate token " + t.text());
    }
    if (boundaries != 1) throw InputError("token set must contain exactly one \"|\"");
  }

  /// Blank, Boundary, then the given tokens in canonical order.
  static TokenSet canonical(const std::set<Token>& symbols) {
    std::vector<Token> tokens{Token::blank(), Token::boundary()};
    for (const auto& t : symbols) {
      if (!t.is_blank() && !t.is_boundary()) tokens.push_back(t);
    }
    return TokenSet(std::move(tokens));
  }

  std::size_t size() const { return tokens_.size(); }
  const Token& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<Token>& tokens() const { return tokens_; }
  TokenId blank_id() const { return 0; }
  TokenId boundary_id() const { return boundary_; }

  std::optional<TokenId> find(const Token& t) const {
    auto it = index_.find(t);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TokenId id(const Token& t) const {
    if (auto i = find(t)) return *i;
    throw InputError("token not in vocabulary: " + t.text());
  }

  bool has_tags() const {
    return std::any_of(tokens_.begin(), tokens_.end(),
                       [](const Token& t) { return t.tag.has_value(); });
  }

  std::vector<TokenId> encode(const std::vector<Token>& seq) const {
    std::vector<TokenId> out;
    out.reserve(seq.size());
    for (const auto& t : seq) out.push_back(id(t));
    return out;
  }

  std::vector<Token> decode(const std::vector<TokenId>& ids) const {
    std::vector<Token> out;
    out.reserve(ids.size());
    for (auto i : ids) out.push_back(token(i));
    return out;
  }

  friend bool operator==(const TokenSet& a, const TokenSet& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<Token> tokens_;
  std::map<Token, TokenId> index_;
  TokenId boundary_ = 0;
};

inline TokenSet build_vocab(const std::vector<std::string>& references, TaggingMode mode) {
  std::set<Token> symbols;
  for (const auto& r : references) {
    for (const auto& t : parse_tokens(r, mode)) symbols.insert(t);
  }
  return TokenSet::canonical(symbols);
}

/// The untagged alphabet obtained by applying strip_tag to every token.
inline TokenSet strip_tags(const TokenSet& tagged) {
  std::set<Token> symbols;
  for (const auto& t : tagged.tokens()) symbols.insert(strip_tag(t));
  return TokenSet::canonical(symbols);
}

// Vocab file: one token text per line in id order.
inline void write_vocab(const TokenSet& vocab, const std::filesystem::path& path) {
  auto out = textio::open_out(path);
  for (const auto& t : vocab.tokens()) out << t.text() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

/// Reads a vocab file. A digit-only alphabet (besides <blank> and "|") is a
/// detector alphabet and yields Level tokens; otherwise every entry is a
/// character with an optional trailing tag digit.
inline TokenSet read_vocab(const std::filesystem::path& path) {
  std::vector<std::u32string> entries;
  std::size_t lineno = 0;
  for (const auto& line : textio::read_lines(path)) {
    ++lineno;
    auto text = unicode::decode(textio::trim(line));
    if (text.empty()) throw ParseError("empty vocab entry in " + path.string(), lineno);
    entries.push_back(std::move(text));
  }
  bool detector = true;
  std::size_t symbols = 0;
  for (const auto& e : entries) {
    if (e == U"<blank>" || e == U"|") continue;
    ++symbols;
    if (!(e.size() == 1 && level_from_digit(e[0]))) detector = false;
  }
  detector = detector && symbols > 0;
  std::vector<Token> tokens;
  lineno = 0;
  for (const auto& e : entries) {
    ++lineno;
    if (e == U"<blank>") {
      tokens.push_back(Token::blank());
    } else if (e == U"|") {
      tokens.push_back(Token::boundary());
    } else if (detector) {
      tokens.push_back(Token::level(*level_from_digit(e[0])));
    } else if (e.size() == 1) {
      tokens.push_back(Token::character(e[0]));
    } else if (e.size() == 2 && level_from_digit(e[1])) {
      tokens.push_back(Token::character(e[0], level_from_digit(e[1])));
    } else {
      throw ParseError("malformed vocab entry \"" + unicode::encode(e) + "\" in " + path.string(),
                       lineno);
    }
  }
  try {
    return TokenSet(std::move(tokens));
  } catch (const InputError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Lexicon

class Lexicon {
 public:
  Lexicon() = default;

  void add(const std::string& word, std::u32string spelling) {
    if (word.empty()) throw InputError("empty lexicon word");
    if (spelling.empty()) throw InputError("lexicon entry with empty spelling: " + word);
    entries_[word] = std::move(spelling);
  }

  void add(const std::string& word) { add(word, unicode::decode(word)); }

  const std::map<std::string, std::u32string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(const std::string& w) const { return entries_.count(w) != 0; }

  /// Characters used by some entry but absent (untagged) from the vocab.
  std::set<char32_t> missing_characters(const TokenSet& vocab) const {
    std::set<char32_t> out;
    for (const auto& [w, s] : entries_) {
      for (char32_t c : s) {
        if (!vocab.find(Token::character(c))) out.insert(c);
      }
    }
    return out;
  }

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  std::map<std::string, std::u32string> entries_;
};

inline Lexicon build_lexicon(const Corpus& corpus) {
  Lexicon lex;
  for (const auto& u : corpus) {
    for (const auto& w : u.words()) lex.add(w);
  }
  return lex;
}

/// Lexicon over the words of (possibly tagged) reference strings; tags are
/// dropped so entries are spelled with base characters only.
inline Lexicon lexicon_from_references(const std::vector<std::string>& references,
                                       TaggingMode mode) {
  Lexicon lex;
  for (const auto& r : references) {
    std::u32string word;
    auto flush = [&] {
      if (!word.empty()) lex.add(unicode::encode(word), word);
      word.clear();
    };
    for (const auto& t : parse_tokens(r, mode)) {
      if (t.is_char()) {
        word.push_back(t.base);
      } else {
        flush();
      }
    }
    flush();
  }
  return lex;
}

inline void write_lexicon(const Lexicon& lex, const std::filesystem::path& path) {
  auto out = textio::open_out(path);
  for (const auto& [word, spelling] : lex.entries()) {
    out << word << '\t';
    for (std::size_t i = 0; i < spelling.size(); ++i) {
      if (i) out << ' ';
      out << unicode::encode(spelling[i]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

inline Lexicon read_lexicon(const std::filesystem::path& path) {
  Lexicon lex;
  std::size_t lineno = 0;
  for (const auto& line : textio::read_lines(path)) {
    ++lineno;
    auto fields = textio::split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw ParseError("lexicon entry without spelling", lineno);
    std::u32string spelling;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto c = unicode::decode(fields[i]);
      if (c.size() != 1) throw ParseError("lexicon spelling unit is not one character", lineno);
      spelling.push_back(c[0]);
    }
    lex.add(fields[0], std::move(spelling));
  }
  return lex;
}

// ---------------------------------------------------------------------------
// LexiconTrie

/// Prefix tree over lexicon spellings. Node 0 is the root.
class LexiconTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  struct Node {
    std::map<char32_t, NodeId> children;
    std::vector<std::string> words;  // sorted; words spelled by the root path
  };

  LexiconTrie() : nodes_(1) {}

  explicit LexiconTrie(const Lexicon& lex) : nodes_(1) {
    for (const auto& [word, spelling] : lex.entries()) insert(word, spelling);
  }

  void insert(const std::string& word, std::u32string_view spelling) {
    NodeId n = kRoot;
    for (char32_t c : spelling) {
      auto it = nodes_[n].children.find(c);
      if (it == nodes_[n].children.end()) {
        const auto next = static_cast<NodeId>(nodes_.size());
        nodes_[n].children.emplace(c, next);
        nodes_.emplace_back();
        n = next;
      } else {
        n = it->second;
      }
    }
    auto& words = nodes_[n].words;
    if (n == kRoot) throw InputError("lexicon entry with empty spelling: " + word);
    if (!std::binary_search(words.begin(), words.end(), word)) {
      words.insert(std::upper_bound(words.begin(), words.end(), word), word);
      ++word_count_;
    }
  }

  std::optional<NodeId> child(NodeId n, char32_t c) const {
    const auto& ch = nodes_[n].children;
    auto it = ch.find(c);
    if (it == ch.end()) return std::nullopt;
    return it->second;
  }

  std::optional<NodeId> find(std::u32string_view spelling) const {
    NodeId n = kRoot;
    for (char32_t c : spelling) {
      auto next = child(n, c);
      if (!next) return std::nullopt;
      n = *next;
    }
    return n;
  }

  bool is_complete(NodeId n) const { return !nodes_[n].words.empty(); }

  /// Lexicographically first word spelled by the path to n.
  const std::string& word(NodeId n) const { return nodes_[n].words.front(); }

  bool contains(std::u32string_view spelling) const {
    auto n = find(spelling);
    return n && is_complete(*n);
  }

  const Node& node(NodeId n) const { return nodes_[n]; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t word_count() const { return word_count_; }
  bool empty() const { return word_count_ == 0; }

  /// Every stored word, collected by depth-first traversal.
  std::set<std::string> words() const {
    std::set<std::string> out;
    std::vector<NodeId> stack{kRoot};
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      out.insert(nodes_[n].words.begin(), nodes_[n].words.end());
      for (const auto& [c, next] : nodes_[n].children) stack.push_back(next);
    }
    return out;
  }

 private:
  std::vector<Node> nodes_;
  std::size_t word_count_ = 0;
};

inline LexiconTrie build_trie(const Lexicon& lex) { return LexiconTrie(lex); }

}  // namespace promdec
