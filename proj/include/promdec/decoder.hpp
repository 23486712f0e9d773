// promdec/decoder.hpp

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
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "promdec/emissions.hpp"
#include "promdec/error.hpp"
#include "promdec/lm.hpp"
#include "promdec/logmath.hpp"
#include "promdec/vocab.hpp"

namespace promdec {

enum class DecodeMode { Lexfree, Lex, LMBeam };

inline std::string_view decode_mode_name(DecodeMode m) {
  switch (m) {
    case DecodeMode::Lexfree: return "lexfree";
    case DecodeMode::Lex: return "lex";
    case DecodeMode::LMBeam: return "lm";
  }
  return "?";
}

struct DecodeConfig {
  std::size_t beam_width = 100;
  double lm_weight = 0.8;    // alpha, applied to natural-log LM scores
  double word_bonus = 1.0;   // beta, per emitted word
  DecodeMode mode = DecodeMode::Lexfree;

  void validate() const {
    if (beam_width < 1) throw InputError("beam width must be at least 1");
    if (!(lm_weight >= 0.0)) throw InputError("LM weight must be non-negative");
  }
};

/// Inclusive frame range.
struct FrameSpan {
  std::size_t first = 0;
  std::size_t last = 0;
  friend bool operator==(const FrameSpan&, const FrameSpan&) = default;
};

struct Hypothesis {
  std::vector<TokenId> tokens;     // collapsed output, never contains Blank
  std::vector<std::string> words;
  double score = kLogZero;
  std::vector<FrameSpan> segments;  // one per word
};

// ---------------------------------------------------------------------------
// Basic CTC operations

inline std::vector<TokenId> ctc_collapse(std::span<const TokenId> path, TokenId blank = 0) {
  std::vector<TokenId> out;
  std::optional<TokenId> prev;
  for (TokenId id : path) {
    if (id != prev && id != blank) out.push_back(id);
    prev = id;
  }
  return out;
}

/// log P(tokens | E): sum over every frame path that collapses to tokens.
/// Returns kLogZero when the sequence cannot fit in E.frames() frames.
inline double ctc_score(const EmissionMatrix& e, std::span<const TokenId> tokens, TokenId blank = 0) {
  for (TokenId id : tokens) {
    if (id == blank) throw InputError("ctc_score: label sequence contains blank");
    if (id >= e.vocab_size()) throw InputError("ctc_score: token id out of range");
  }
  const std::size_t frames = e.frames();
  const std::size_t s_len = 2 * tokens.size() + 1;
  auto label = [&](std::size_t s) { return s % 2 == 0 ? blank : tokens[s / 2]; };
  std::vector<double> alpha(s_len, kLogZero), next(s_len, kLogZero);
  alpha[0] = e.at(0, blank);
  if (s_len > 1) alpha[1] = e.at(0, label(1));
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double a = alpha[s];
      if (s >= 1) a = log_add(a, alpha[s - 1]);
      if (s >= 2 && s % 2 == 1 && label(s) != label(s - 2)) a = log_add(a, alpha[s - 2]);
      next[s] = a == kLogZero ? kLogZero : a + e.at(t, label(s));
    }
    std::swap(alpha, next);
  }
  double total = alpha[s_len - 1];
  if (s_len > 1) total = log_add(total, alpha[s_len - 2]);
  return total;
}

/// Best single frame path collapsing to `tokens`; span of frames per token.
/// Empty when infeasible.
inline std::vector<FrameSpan> ctc_align(const EmissionMatrix& e, std::span<const TokenId> tokens,
                                        TokenId blank = 0) {
  if (tokens.empty()) return {};
  const std::size_t frames = e.frames();
  const std::size_t s_len = 2 * tokens.size() + 1;
  auto label = [&](std::size_t s) { return s % 2 == 0 ? blank : tokens[s / 2]; };
  std::vector<std::vector<double>> delta(frames, std::vector<double>(s_len, kLogZero));
  std::vector<std::vector<std::uint32_t>> from(frames, std::vector<std::uint32_t>(s_len, 0));
  delta[0][0] = e.at(0, blank);
  delta[0][1] = e.at(0, label(1));
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double best = delta[t - 1][s];
      std::size_t arg = s;
      if (s >= 1 && delta[t - 1][s - 1] > best) { best = delta[t - 1][s - 1]; arg = s - 1; }
      if (s >= 2 && s % 2 == 1 && label(s) != label(s - 2) && delta[t - 1][s - 2] > best) {
        best = delta[t - 1][s - 2];
        arg = s - 2;
      }
      if (best == kLogZero) continue;
      delta[t][s] = best + e.at(t, label(s));
      from[t][s] = static_cast<std::uint32_t>(arg);
    }
  }
  std::size_t s = s_len - 1;
  if (delta[frames - 1][s_len - 2] > delta[frames - 1][s]) s = s_len - 2;
  if (delta[frames - 1][s] == kLogZero) return {};
  std::vector<FrameSpan> spans(tokens.size(), FrameSpan{frames, 0});
  for (std::size_t t = frames; t-- > 0;) {
    if (s % 2 == 1) {
      auto& sp = spans[s / 2];
      sp.first = std::min(sp.first, t);
      sp.last = std::max(sp.last, t);
    }
    if (t > 0) s = from[t][s];
  }
  return spans;
}

/// Words spelled by runs of non-boundary tokens. Char tokens contribute
/// their base (plus the tag digit when keep_tags); Level tokens their digit.
inline std::vector<std::string> tokens_to_words(std::span<const TokenId> tokens, const TokenSet& vocab,
                                                bool keep_tags = false) {
  std::vector<std::string> words;
  std::string cur;
  bool open = false;
  for (TokenId id : tokens) {
    const Token& t = vocab.token(id);
    if (t.is_boundary() || t.is_blank()) {
      if (open) words.push_back(std::move(cur));
      cur.clear();
      open = false;
      continue;
    }
    open = true;
    cur += keep_tags ? t.text() : strip_tag(t).text();
  }
  if (open) words.push_back(std::move(cur));
  return words;
}

/// Frame span of every word of `tokens` (see tokens_to_words).
inline std::vector<FrameSpan> word_segments(const EmissionMatrix& e, std::span<const TokenId> tokens,
                                            const TokenSet& vocab) {
  const auto spans = ctc_align(e, tokens, vocab.blank_id());
  std::vector<FrameSpan> out;
  if (spans.empty()) return out;
  bool open = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == vocab.boundary_id()) {
      open = false;
      continue;
    }
    if (!open) out.push_back(spans[i]);
    out.back().last = spans[i].last;
    open = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Greedy (Lexfree)

/// Per-frame argmax (lowest id on ties), then ctc_collapse. The score is
/// the log-probability of the chosen frame path.
inline Hypothesis greedy_decode(const EmissionMatrix& e, TokenId blank = 0) {
  std::vector<TokenId> path(e.frames());
  double score = 0.0;
  for (std::size_t t = 0; t < e.frames(); ++t) {
    const auto row = e.row(t);
    std::size_t best = 0;
    for (std::size_t v = 1; v < row.size(); ++v) {
      if (row[v] > row[best]) best = v;
    }
    path[t] = static_cast<TokenId>(best);
    score += row[best];
  }
  Hypothesis h;
  h.tokens = ctc_collapse(path, blank);
  h.score = score;
  return h;
}

/// Greedy decode with words and word frame spans filled in.
inline Hypothesis lexfree_decode(const EmissionMatrix& e, const TokenSet& vocab, bool keep_tags = false) {
  if (e.vocab_size() != vocab.size()) throw InputError("emission width does not match vocabulary");
  Hypothesis h = greedy_decode(e, vocab.blank_id());
  h.words = tokens_to_words(h.tokens, vocab, keep_tags);
  h.segments = word_segments(e, h.tokens, vocab);
  return h;
}

/// Greedy decode over a tagged alphabet; tags stay on the tokens (and on
/// the words), ready for prominence extraction.
inline Hypothesis decode_lexfree_tagged(const EmissionMatrix& e, const TokenSet& vocab) {
  return lexfree_decode(e, vocab, /*keep_tags=*/true);
}

// ---------------------------------------------------------------------------
// Exhaustive search (verification oracle)

inline constexpr std::size_t kExhaustiveLimit = 4'000'000;

/// Scores an output sequence on top of its CTC log-probability; nullopt
/// excludes the sequence.
using SequenceAdjust = std::function<std::optional<double>(std::span<const TokenId>)>;

/// argmax over all token sequences of length <= max_len of
/// ctc_score + adjust; ties go to the lexicographically smallest sequence.
inline Hypothesis exhaustive_decode(const EmissionMatrix& e, std::size_t max_len,
                                    const SequenceAdjust& adjust = {}, TokenId blank = 0) {
  const std::size_t symbols = e.vocab_size() - 1;
  max_len = std::min(max_len, e.frames());
  double total = 1.0, layer = 1.0;
  for (std::size_t l = 1; l <= max_len; ++l) {
    layer *= static_cast<double>(symbols);
    total += layer;
    if (total > static_cast<double>(kExhaustiveLimit)) {
      throw InputError("exhaustive_decode: instance too large (" + std::to_string(symbols) +
                       " symbols, length " + std::to_string(max_len) + ")");
    }
  }
  Hypothesis best;
  std::vector<TokenId> seq;
  // Preorder DFS visits sequences in lexicographic order, so keeping only
  // strict improvements yields the lexicographically first maximizer.
  std::function<void()> visit = [&] {
    double s = ctc_score(e, seq, blank);
    if (s != kLogZero) {
      std::optional<double> adj = 0.0;
      if (adjust) adj = adjust(seq);
      if (adj && s + *adj > best.score) {
        best.score = s + *adj;
        best.tokens = seq;
      }
    }
    if (seq.size() == max_len) return;
    for (TokenId id = 0; id < e.vocab_size(); ++id) {
      if (id == blank) continue;
      seq.push_back(id);
      visit();
      seq.pop_back();
    }
  };
  visit();
  return best;
}

// ---------------------------------------------------------------------------
// Lexicon-constrained prefix beam search

namespace detail {

struct Prefix {
  std::int32_t parent = -1;
  TokenId token = 0;
  LexiconTrie::NodeId trie = LexiconTrie::kRoot;
  std::uint32_t words = 0;
  std::uint32_t depth = 0;
  double lm = 0.0;  // log10 LM score of committed words
  const std::string* hist[2] = {nullptr, nullptr};  // last two committed words, most recent in [1]
  double pb = kLogZero, pnb = kLogZero;
  double next_pb = kLogZero, next_pnb = kLogZero;
  std::uint64_t stamp = 0;
  std::uint64_t kept = 0;
};

inline double lm_word(const lm::NGramModel& lm, const Prefix& p, const std::string& word) {
  std::vector<std::string> ctx;
  if (!p.hist[0] && !p.hist[1]) {
    ctx.emplace_back(lm::kBos);
  } else {
    if (p.hist[0]) {
      ctx.push_back(*p.hist[0]);
    } else {
      ctx.emplace_back(lm::kBos);
    }
    ctx.push_back(*p.hist[1]);
  }
  return lm.score(ctx, word);
}

}  // namespace detail

/// CTC prefix beam search whose prefixes spell lexicon words separated by
/// Boundary tokens.
///
/// Every maximal run of characters in a prefix is a path in the trie; a
/// Boundary may follow a complete word or another Boundary (or start the
/// output). A hypothesis may end at a Boundary or at a complete word.
/// Hypotheses are ranked by
///   log P_ctc + lm_weight * ln(10) * log10 P_lm(words) + word_bonus * |words|
/// where the LM term (including </s>) is present only when an LM is given.
inline Hypothesis beam_decode(const EmissionMatrix& e, const TokenSet& vocab, const LexiconTrie& trie,
                              const lm::NGramModel* lm, const DecodeConfig& cfg) {
  cfg.validate();
  if (trie.empty()) throw InputError("beam_decode: empty lexicon");
  if (e.vocab_size() != vocab.size()) throw InputError("emission width does not match vocabulary");
  if (vocab.has_tags()) {
    throw InputError("beam_decode needs an untagged vocabulary; marginalize tagged emissions first");
  }
  const TokenId blank = vocab.blank_id();
  const TokenId boundary = vocab.boundary_id();
  const double lm_scale = lm ? cfg.lm_weight * kLn10 : 0.0;

  // Token ids reachable from each trie node.
  std::vector<std::vector<std::pair<TokenId, LexiconTrie::NodeId>>> arcs(trie.node_count());
  for (LexiconTrie::NodeId n = 0; n < trie.node_count(); ++n) {
    for (const auto& [c, child] : trie.node(n).children) {
      if (auto id = vocab.find(Token::character(c))) arcs[n].emplace_back(*id, child);
    }
    std::sort(arcs[n].begin(), arcs[n].end());
  }

  std::vector<detail::Prefix> arena(1);
  arena[0].pb = 0.0;
  std::unordered_map<std::uint64_t, std::int32_t> children;
  std::vector<std::int32_t> beam{0};
  std::vector<std::int32_t> touched;
  std::uint64_t stamp = 0;

  auto child_of = [&](std::int32_t p, TokenId tok, LexiconTrie::NodeId next_trie) {
    const std::uint64_t key = (static_cast<std::uint64_t>(p) << 32) | tok;
    auto it = children.find(key);
    if (it != children.end()) return it->second;
    detail::Prefix c;
    const detail::Prefix& par = arena[p];
    c.parent = p;
    c.token = tok;
    c.depth = par.depth + 1;
    c.words = par.words;
    c.lm = par.lm;
    c.hist[0] = par.hist[0];
    c.hist[1] = par.hist[1];
    c.trie = next_trie;
    if (tok == boundary && par.trie != LexiconTrie::kRoot) {
      const std::string& w = trie.word(par.trie);
      if (lm) c.lm += detail::lm_word(*lm, par, w);
      c.words += 1;
      c.hist[0] = par.hist[1];
      c.hist[1] = &w;
    }
    const auto id = static_cast<std::int32_t>(arena.size());
    arena.push_back(c);
    children.emplace(key, id);
    return id;
  };
  auto add = [&](std::int32_t p, double b, double nb) {
    auto& x = arena[p];
    if (x.stamp != stamp) {
      x.stamp = stamp;
      x.next_pb = kLogZero;
      x.next_pnb = kLogZero;
      touched.push_back(p);
    }
    x.next_pb = log_add(x.next_pb, b);
    x.next_pnb = log_add(x.next_pnb, nb);
  };
  auto sequence = [&](std::int32_t p) {
    std::vector<TokenId> seq(arena[p].depth);
    for (std::size_t i = seq.size(); p > 0; p = arena[p].parent) seq[--i] = arena[p].token;
    return seq;
  };
  // Lexicographic comparison of the token sequences of two prefixes.
  auto seq_less = [&](std::int32_t a, std::int32_t b) { return sequence(a) < sequence(b); };

  for (std::size_t t = 0; t < e.frames(); ++t) {
    ++stamp;
    touched.clear();
    const auto row = e.row(t);
    for (std::int32_t p : beam) {
      const double pb = arena[p].pb, pnb = arena[p].pnb;
      const double total = log_add(pb, pnb);
      add(p, total + row[blank], kLogZero);
      if (p != 0) add(p, kLogZero, pnb + row[arena[p].token]);
      const LexiconTrie::NodeId node = arena[p].trie;
      const TokenId last = p != 0 ? arena[p].token : blank;
      auto extend = [&](TokenId tok, LexiconTrie::NodeId next_trie) {
        const double from = tok == last ? pb : total;
        if (from == kLogZero) return;
        const std::int32_t c = child_of(p, tok, next_trie);
        add(c, kLogZero, from + row[tok]);
      };
      if (node == LexiconTrie::kRoot || trie.is_complete(node)) extend(boundary, LexiconTrie::kRoot);
      for (const auto& [tok, next] : arcs[node]) extend(tok, next);
    }
    std::vector<std::pair<double, std::int32_t>> ranked;
    ranked.reserve(touched.size());
    for (std::int32_t p : touched) {
      auto& x = arena[p];
      x.pb = x.next_pb;
      x.pnb = x.next_pnb;
      const double ctc = log_add(x.pb, x.pnb);
      if (ctc == kLogZero) continue;
      ranked.emplace_back(ctc + lm_scale * x.lm + cfg.word_bonus * x.words, p);
    }
    auto better = [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return seq_less(a.second, b.second);
    };
    // The last frame is not pruned: every surviving prefix may end the utterance.
    if (t + 1 < e.frames() && ranked.size() > cfg.beam_width) {
      std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(cfg.beam_width),
                       ranked.end(), better);
      ranked.resize(cfg.beam_width);
    }
    // Prefixes that fall out of the beam lose their probability mass.
    for (const auto& r : ranked) arena[r.second].kept = stamp;
    for (std::int32_t p : touched) {
      if (arena[p].kept != stamp) arena[p].pb = arena[p].pnb = kLogZero;
    }
    beam.clear();
    for (const auto& r : ranked) beam.push_back(r.second);
    if (beam.empty()) break;
  }

  Hypothesis best;
  std::int32_t best_p = -1;
  for (std::int32_t p : beam) {
    const auto& x = arena[p];
    const double ctc = log_add(x.pb, x.pnb);
    if (ctc == kLogZero) continue;
    const bool pending = x.trie != LexiconTrie::kRoot;
    if (pending && !trie.is_complete(x.trie)) continue;
    double lm_total = x.lm;
    std::uint32_t words = x.words;
    if (pending) {
      words += 1;
      if (lm) lm_total += detail::lm_word(*lm, x, trie.word(x.trie));
    }
    if (lm) {
      detail::Prefix tail = x;
      if (pending) {
        tail.hist[0] = x.hist[1];
        tail.hist[1] = &trie.word(x.trie);
      }
      lm_total += detail::lm_word(*lm, tail, std::string(lm::kEos));
    }
    const double score = ctc + lm_scale * lm_total + cfg.word_bonus * words;
    if (best_p < 0 || score > best.score || (score == best.score && seq_less(p, best_p))) {
      best.score = score;
      best_p = p;
    }
  }
  if (best_p < 0) return Hypothesis{};
  best.tokens = sequence(best_p);
  // Words are recovered from the trie so homographs resolve consistently.
  LexiconTrie::NodeId node = LexiconTrie::kRoot;
  for (TokenId tok : best.tokens) {
    if (tok == boundary) {
      if (node != LexiconTrie::kRoot) best.words.push_back(trie.word(node));
      node = LexiconTrie::kRoot;
    } else {
      node = *trie.child(node, vocab.token(tok).base);
    }
  }
  if (node != LexiconTrie::kRoot) best.words.push_back(trie.word(node));
  best.segments = word_segments(e, best.tokens, vocab);
  return best;
}

}  // namespace promdec
