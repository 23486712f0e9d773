// promdec/lm.hpp

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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "promdec/error.hpp"
#include "promdec/textio.hpp"

namespace promdec::lm {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";
inline constexpr int kMaxOrder = 3;

/// log10 probability reported for <s> and for words the model cannot score
/// (out-of-vocabulary words of a closed-vocabulary model).
inline constexpr double kNoProb = -99.0;

using WordId = std::uint32_t;
using Ngram = std::vector<WordId>;
using Sentence = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Counting

/// Raw and adjusted n-gram counts of <s>/</s>-padded sentences.
///
/// Adjusted counts equal raw counts at the highest order and for n-grams
/// that begin with <s>; every other lower-order n-gram is counted by the
/// number of distinct words that precede it. The unigram <s> is kept in
/// `raw` only: it is never predicted.
struct CountTable {
  int order = kMaxOrder;
  std::vector<std::string> words;  // id -> word; 0 = <unk>, 1 = <s>, 2 = </s>
  std::array<std::map<Ngram, std::uint64_t>, kMaxOrder + 1> raw;
  std::array<std::map<Ngram, std::uint64_t>, kMaxOrder + 1> adjusted;
  // count_of_counts[n][k]: order-n n-grams whose adjusted count is exactly k.
  std::array<std::array<std::uint64_t, 5>, kMaxOrder + 1> count_of_counts{};

  static constexpr WordId kUnkId = 0;
  static constexpr WordId kBosId = 1;
  static constexpr WordId kEosId = 2;

  std::uint64_t raw_count(const std::vector<std::string>& ngram) const {
    Ngram ids;
    for (const auto& w : ngram) {
      auto it = std::find(words.begin(), words.end(), w);
      if (it == words.end()) return 0;
      ids.push_back(static_cast<WordId>(it - words.begin()));
    }
    if (ids.empty() || ids.size() > static_cast<std::size_t>(order)) return 0;
    auto it = raw[ids.size()].find(ids);
    return it == raw[ids.size()].end() ? 0 : it->second;
  }

  std::uint64_t adjusted_count(const std::vector<std::string>& ngram) const {
    Ngram ids;
    for (const auto& w : ngram) {
      auto it = std::find(words.begin(), words.end(), w);
      if (it == words.end()) return 0;
      ids.push_back(static_cast<WordId>(it - words.begin()));
    }
    if (ids.empty() || ids.size() > static_cast<std::size_t>(order)) return 0;
    auto it = adjusted[ids.size()].find(ids);
    return it == adjusted[ids.size()].end() ? 0 : it->second;
  }
};

inline CountTable count_ngrams(const std::vector<Sentence>& sentences, int order = kMaxOrder) {
  if (order < 1 || order > kMaxOrder) throw InputError("n-gram order must be 1, 2 or 3");
  if (sentences.empty()) throw InputError("cannot count n-grams of an empty corpus");
  CountTable c;
  c.order = order;
  std::map<std::string, WordId> ids;
  std::vector<std::string> vocab;
  for (const auto& s : sentences) {
    for (const auto& w : s) {
      if (w == kBos || w == kEos) throw InputError("sentence contains reserved token " + w);
      if (w != kUnk) ids.emplace(w, 0);
    }
  }
  c.words = {std::string(kUnk), std::string(kBos), std::string(kEos)};
  for (auto& [w, id] : ids) {
    id = static_cast<WordId>(c.words.size());
    c.words.push_back(w);
  }
  std::vector<WordId> padded;
  for (const auto& s : sentences) {
    padded.assign(1, CountTable::kBosId);
    for (const auto& w : s) padded.push_back(w == kUnk ? CountTable::kUnkId : ids.at(w));
    padded.push_back(CountTable::kEosId);
    for (std::size_t end = 1; end <= padded.size(); ++end) {
      for (int n = 1; n <= order && static_cast<std::size_t>(n) <= end; ++n) {
        ++c.raw[n][Ngram(padded.begin() + (end - n), padded.begin() + end)];
      }
    }
  }
  c.adjusted[order] = c.raw[order];
  for (int n = order - 1; n >= 1; --n) {
    auto& adj = c.adjusted[n];
    for (const auto& [g, cnt] : c.raw[n]) {
      if (g.front() == CountTable::kBosId) adj[g] = cnt;
    }
    for (const auto& [g, cnt] : c.raw[n + 1]) {
      Ngram suffix(g.begin() + 1, g.end());
      if (suffix.front() != CountTable::kBosId) ++adj[suffix];
    }
  }
  c.adjusted[1].erase(Ngram{CountTable::kBosId});
  for (int n = 1; n <= order; ++n) {
    for (const auto& [g, cnt] : c.adjusted[n]) {
      if (cnt >= 1 && cnt <= 4) ++c.count_of_counts[n][cnt];
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Model

struct Discounts {
  std::array<double, 4> d{};  // d[1], d[2], d[3] (3 stands for 3+)
  bool fallback = false;
  double operator()(std::uint64_t count) const { return d[std::min<std::uint64_t>(count, 3)]; }
};

/// Backoff n-gram model with log10 probabilities and backoff weights.
class NGramModel {
 public:
  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;
  };

  NGramModel() = default;

  int order() const { return order_; }
  const std::vector<std::string>& words() const { return words_; }
  bool has_unk() const { return unk_.has_value(); }
  std::size_t ngram_count(int n) const { return tables_.at(n).size(); }
  const std::array<Discounts, kMaxOrder + 1>& discounts() const { return discounts_; }

  std::optional<WordId> word_id(std::string_view w) const {
    auto it = index_.find(std::string(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Entry* find(std::span<const WordId> ngram) const {
    if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return nullptr;
    const auto& table = tables_[ngram.size()];
    auto it = table.find(pack(ngram));
    return it == table.end() ? nullptr : &it->second;
  }

  const Entry* find(const std::vector<std::string>& ngram) const {
    Ngram ids;
    for (const auto& w : ngram) {
      auto id = word_id(w);
      if (!id) return nullptr;
      ids.push_back(*id);
    }
    return find(std::span<const WordId>(ids));
  }

  /// log10 p(word | context); context holds at most order-1 preceding
  /// words, most recent last. Unknown words map to <unk>.
  double score(std::span<const std::string> context, std::string_view word) const {
    auto wid = word_id(word);
    if (!wid) wid = unk_;
    if (!wid) return kNoProb;
    const std::size_t keep = std::min<std::size_t>(context.size(), static_cast<std::size_t>(order_ - 1));
    std::vector<std::optional<WordId>> ctx;
    for (std::size_t i = context.size() - keep; i < context.size(); ++i) {
      auto id = word_id(context[i]);
      ctx.push_back(id ? id : unk_);
    }
    return score_ids(ctx, *wid);
  }

  double score(const std::vector<std::string>& context, std::string_view word) const {
    return score(std::span<const std::string>(context), word);
  }

  /// Sum of per-word scores of <s> words </s>.
  double sentence_log10(const std::vector<std::string>& words) const {
    std::vector<std::string> hist{std::string(kBos)};
    double total = 0.0;
    for (const auto& w : words) {
      total += score(hist, w);
      hist.push_back(w);
    }
    return total + score(hist, kEos);
  }

  // Construction helpers used by the estimator and the ARPA reader.
  void reset(int order) {
    order_ = order;
    words_.clear();
    index_.clear();
    unk_.reset();
    for (auto& t : tables_) t.clear();
  }
  WordId intern(const std::string& w) {
    auto [it, added] = index_.emplace(w, static_cast<WordId>(words_.size()));
    if (added) {
      words_.push_back(w);
      if (w == kUnk) unk_ = it->second;
    }
    return it->second;
  }
  void set(std::span<const WordId> ngram, Entry e) { tables_[ngram.size()][pack(ngram)] = e; }
  void set_discounts(int n, Discounts d) { discounts_[n] = d; }

  /// Entries of order n sorted by their word strings.
  std::vector<std::pair<std::vector<std::string>, Entry>> sorted_entries(int n) const {
    std::vector<std::pair<std::vector<std::string>, Entry>> out;
    for (const auto& [key, e] : tables_.at(n)) {
      std::vector<std::string> ws;
      for (auto id : unpack(key, n)) ws.push_back(words_[id]);
      out.emplace_back(std::move(ws), e);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

 private:
  static constexpr int kBits = 21;

  static std::uint64_t pack(std::span<const WordId> ids) {
    std::uint64_t k = 0;
    for (auto id : ids) k = (k << kBits) | (static_cast<std::uint64_t>(id) + 1);
    return k;
  }
  static std::vector<WordId> unpack(std::uint64_t key, int n) {
    std::vector<WordId> out(n);
    for (int i = n - 1; i >= 0; --i) {
      out[i] = static_cast<WordId>((key & ((1u << kBits) - 1)) - 1);
      key >>= kBits;
    }
    return out;
  }

  double score_ids(const std::vector<std::optional<WordId>>& ctx, WordId w) const {
    double backoff = 0.0;
    for (std::size_t len = ctx.size() + 1; len >= 1; --len) {
      const std::size_t hist = len - 1;
      bool known = true;
      Ngram g;
      for (std::size_t i = ctx.size() - hist; i < ctx.size(); ++i) {
        if (!ctx[i]) { known = false; break; }
        g.push_back(*ctx[i]);
      }
      if (known) {
        g.push_back(w);
        if (const Entry* e = find(std::span<const WordId>(g))) return backoff + e->log10_prob;
        if (hist > 0) {
          if (const Entry* h = find(std::span<const WordId>(g.data(), hist))) backoff += h->log10_backoff;
        }
      }
    }
    return kNoProb;
  }

  int order_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::optional<WordId> unk_;
  std::array<std::unordered_map<std::uint64_t, Entry>, kMaxOrder + 1> tables_;
  std::array<Discounts, kMaxOrder + 1> discounts_{};
};

// ---------------------------------------------------------------------------
// Modified Kneser-Ney estimation

struct MknOptions {
  /// Replace undefined discounts of an order with one fixed discount
  /// instead of throwing DegenerateCountsError.
  bool degenerate_fallback = false;
  double fallback_discount = 0.5;
  /// Leave <unk> out of the vocabulary; unknown words then score kNoProb.
  bool closed_vocabulary = false;
};

/// Discounts D1, D2, D3+ from count-of-counts N1..N4. Empty when they are
/// undefined (N1, N2 or N3 zero) or fall outside [0, k].
inline std::optional<Discounts> mkn_discounts(const std::array<std::uint64_t, 5>& n) {
  if (n[1] == 0 || n[2] == 0 || n[3] == 0) return std::nullopt;
  const double n1 = static_cast<double>(n[1]), n2 = static_cast<double>(n[2]);
  const double n3 = static_cast<double>(n[3]), n4 = static_cast<double>(n[4]);
  const double y = n1 / (n1 + 2.0 * n2);
  Discounts d;
  d.d[1] = 1.0 - 2.0 * y * n2 / n1;
  d.d[2] = 2.0 - 3.0 * y * n3 / n2;
  d.d[3] = 3.0 - 4.0 * y * n4 / n3;
  for (int k = 1; k <= 3; ++k) {
    if (!(d.d[k] >= 0.0 && d.d[k] <= k)) return std::nullopt;
  }
  return d;
}

/// Interpolated modified Kneser-Ney, stored in backoff form:
///   p(w|h) = (a(hw) - D(a(hw))) / a(h*) + gamma(h) p(w|h')
///   gamma(h) = sum_w D(a(hw)) / a(h*)
/// with a() the adjusted counts, the unigram level interpolated with the
/// uniform distribution over the vocabulary (without <s>), and gamma(h)
/// stored as the backoff weight of h. Nothing is pruned.
inline NGramModel estimate_mkn(const CountTable& counts, const MknOptions& opt = {}) {
  const int order = counts.order;
  std::array<Discounts, kMaxOrder + 1> disc{};
  for (int n = 1; n <= order; ++n) {
    if (auto d = mkn_discounts(counts.count_of_counts[n])) {
      disc[n] = *d;
    } else if (opt.degenerate_fallback) {
      disc[n].d = {0.0, opt.fallback_discount, opt.fallback_discount, opt.fallback_discount};
      disc[n].fallback = true;
    } else {
      const auto& c = counts.count_of_counts[n];
      throw DegenerateCountsError(
          "modified Kneser-Ney discounts undefined at order " + std::to_string(n) + " (N1=" +
          std::to_string(c[1]) + " N2=" + std::to_string(c[2]) + " N3=" + std::to_string(c[3]) +
          " N4=" + std::to_string(c[4]) +
          "); retry with the degenerate fallback (absolute discounting, D=0.5)");
    }
  }

  // Vocabulary the unigram level spreads its residual mass over.
  std::size_t vocab = 0;
  for (const auto& [g, a] : counts.adjusted[1]) {
    if (g[0] != CountTable::kUnkId) ++vocab;
  }
  const bool with_unk = !opt.closed_vocabulary || counts.adjusted[1].count(Ngram{CountTable::kUnkId});
  if (with_unk) ++vocab;

  // prob[n][g]: interpolated probability; gamma[n][h]: residual of context h
  // (length n-1) at order n.
  std::array<std::map<Ngram, double>, kMaxOrder + 1> prob;
  std::array<std::map<Ngram, double>, kMaxOrder + 1> gamma;
  for (int n = 1; n <= order; ++n) {
    std::map<Ngram, std::pair<double, double>> ctx;  // h -> (sum a, sum D)
    for (const auto& [g, a] : counts.adjusted[n]) {
      auto& s = ctx[Ngram(g.begin(), g.end() - 1)];
      s.first += static_cast<double>(a);
      s.second += disc[n](a);
    }
    for (const auto& [h, s] : ctx) gamma[n][h] = s.second / s.first;
    for (const auto& [g, a] : counts.adjusted[n]) {
      const Ngram h(g.begin(), g.end() - 1);
      const auto& s = ctx.at(h);
      const double lower = n == 1 ? 1.0 / static_cast<double>(vocab)
                                  : prob[n - 1].at(Ngram(g.begin() + 1, g.end()));
      prob[n][g] = (static_cast<double>(a) - disc[n](a)) / s.first + gamma[n].at(h) * lower;
    }
  }
  if (with_unk && !prob[1].count(Ngram{CountTable::kUnkId})) {
    prob[1][Ngram{CountTable::kUnkId}] = gamma[1].at(Ngram{}) / static_cast<double>(vocab);
  }

  NGramModel m;
  m.reset(order);
  for (const auto& w : counts.words) m.intern(w);
  if (!with_unk) {
    // Rebuild without <unk> so has_unk() reflects the closed vocabulary.
    m.reset(order);
    for (WordId i = 0; i < counts.words.size(); ++i) {
      if (i != CountTable::kUnkId) m.intern(counts.words[i]);
    }
  }
  auto remap = [&](const Ngram& g) {
    Ngram out;
    for (auto id : g) out.push_back(*m.word_id(counts.words[id]));
    return out;
  };
  for (int n = 1; n <= order; ++n) {
    m.set_discounts(n, disc[n]);
    for (const auto& [g, p] : prob[n]) {
      NGramModel::Entry e{std::log10(p), 0.0};
      if (n < order) {
        if (auto it = gamma[n + 1].find(g); it != gamma[n + 1].end()) e.log10_backoff = std::log10(it->second);
      }
      const auto ids = remap(g);
      m.set(ids, e);
    }
  }
  if (order > 1) {
    NGramModel::Entry bos{kNoProb, 0.0};
    if (auto it = gamma[2].find(Ngram{CountTable::kBosId}); it != gamma[2].end()) {
      bos.log10_backoff = std::log10(it->second);
    }
    const auto ids = remap(Ngram{CountTable::kBosId});
    m.set(ids, bos);
  } else {
    const auto ids = remap(Ngram{CountTable::kBosId});
    m.set(ids, {kNoProb, 0.0});
  }
  return m;
}

inline NGramModel train(const std::vector<Sentence>& sentences, int order = kMaxOrder,
                        const MknOptions& opt = {}) {
  return estimate_mkn(count_ngrams(sentences, order), opt);
}

// ---------------------------------------------------------------------------
// ARPA

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, std::size_t line) {
  double x = 0.0;
  auto first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  auto r = std::from_chars(first, s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
    throw ParseError("invalid number \"" + std::string(s) + "\"", line);
  }
  return x;
}

}  // namespace detail

inline void write_arpa(const NGramModel& m, std::ostream& out) {
  out << "\n\\data\\\n";
  for (int n = 1; n <= m.order(); ++n) out << "ngram " << n << '=' << m.ngram_count(n) << '\n';
  for (int n = 1; n <= m.order(); ++n) {
    out << "\n\\" << n << "-grams:\n";
    for (const auto& [ws, e] : m.sorted_entries(n)) {
      out << detail::format_double(e.log10_prob) << '\t';
      for (std::size_t i = 0; i < ws.size(); ++i) out << (i ? " " : "") << ws[i];
      if (n < m.order()) out << '\t' << detail::format_double(e.log10_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

inline void write_arpa(const NGramModel& m, const std::filesystem::path& path) {
  auto out = textio::open_out(path);
  write_arpa(m, out);
  if (!out) throw Error("write failed: " + path.string());
}

inline NGramModel read_arpa(std::istream& in) {
  NGramModel m;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!textio::trim(line).empty()) return true;
    }
    return false;
  };
  while (next() && textio::trim(line) != "\\data\\") {
  }
  if (textio::trim(line) != "\\data\\") throw ParseError("missing \\data\\ header", lineno);
  std::vector<std::size_t> declared;
  while (next() && line.rfind("ngram ", 0) == 0) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("malformed ngram count line", lineno);
    const int n = static_cast<int>(detail::parse_double(textio::trim(std::string_view(line).substr(6, eq - 6)), lineno));
    const auto cnt = static_cast<std::size_t>(detail::parse_double(textio::trim(std::string_view(line).substr(eq + 1)), lineno));
    if (n != static_cast<int>(declared.size()) + 1) throw ParseError("ngram counts out of order", lineno);
    declared.push_back(cnt);
  }
  if (declared.empty()) throw ParseError("no ngram counts in \\data\\ section", lineno);
  if (declared.size() > static_cast<std::size_t>(kMaxOrder)) {
    throw ParseError("order " + std::to_string(declared.size()) + " models are not supported", lineno);
  }
  const int order = static_cast<int>(declared.size());
  m.reset(order);
  for (int n = 1; n <= order; ++n) {
    const std::string header = "\\" + std::to_string(n) + "-grams:";
    if (textio::trim(line) != header) throw ParseError("expected " + header, lineno);
    std::size_t seen = 0;
    while (next()) {
      auto t = textio::trim(line);
      if (!t.empty() && t.front() == '\\') break;
      auto fields = textio::split_fields(line);
      const std::size_t want = static_cast<std::size_t>(n) + 1;
      if (fields.size() != want && fields.size() != want + 1) {
        throw ParseError("expected " + std::to_string(want) + " or " + std::to_string(want + 1) +
                             " fields in " + std::to_string(n) + "-gram entry",
                         lineno);
      }
      NGramModel::Entry e;
      e.log10_prob = detail::parse_double(fields[0], lineno);
      if (fields.size() == want + 1) {
        if (n == order) throw ParseError("backoff weight on highest-order n-gram", lineno);
        e.log10_backoff = detail::parse_double(fields[want], lineno);
      }
      std::vector<WordId> ids;
      for (int i = 1; i <= n; ++i) ids.push_back(m.intern(fields[i]));
      m.set(ids, e);
      ++seen;
    }
    if (seen != declared[n - 1]) {
      throw ParseError("\\data\\ declares " + std::to_string(declared[n - 1]) + " " + std::to_string(n) +
                           "-grams but the section holds " + std::to_string(seen),
                       lineno);
    }
    if (m.ngram_count(n) != seen) throw ParseError("duplicate " + std::to_string(n) + "-gram entries", lineno);
  }
  if (textio::trim(line) != "\\end\\") throw ParseError("missing \\end\\ marker", lineno);
  return m;
}

inline NGramModel read_arpa(const std::filesystem::path& path) {
  auto in = textio::open_in(path);
  try {
    return read_arpa(static_cast<std::istream&>(in));
  } catch (const ParseError& e) {
    throw e.in(path.string());
  }
}

/// Training text: one whitespace-tokenized sentence per line.
inline std::vector<Sentence> read_sentences(const std::filesystem::path& path) {
  std::vector<Sentence> out;
  for (const auto& line : textio::read_lines(path)) out.push_back(textio::split_fields(line));
  return out;
}

}  // namespace promdec::lm
