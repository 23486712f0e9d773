// promdec/metrics.hpp

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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promdec/corpus.hpp"
#include "promdec/error.hpp"
#include "promdec/prominence.hpp"

namespace promdec {

struct EditCounts {
  std::uint64_t substitutions = 0;
  std::uint64_t insertions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t hits = 0;
  std::uint64_t reference_length = 0;

  std::uint64_t errors() const { return substitutions + insertions + deletions; }

  EditCounts& operator+=(const EditCounts& o) {
    substitutions += o.substitutions;
    insertions += o.insertions;
    deletions += o.deletions;
    hits += o.hits;
    reference_length += o.reference_length;
    return *this;
  }
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

/// Unit-cost Levenshtein alignment. Among minimal alignments the one with
/// fewest substitutions, then fewest insertions, is reported.
template <typename T, typename Eq = std::equal_to<>>
EditCounts edit_distance(std::span<const T> ref, std::span<const T> hyp, Eq eq = {}) {
  struct Cell {
    std::uint64_t cost, subs, ins, del, hits;
    bool better_than(const Cell& o) const {
      if (cost != o.cost) return cost < o.cost;
      if (subs != o.subs) return subs < o.subs;
      return ins < o.ins;
    }
  };
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = {j, 0, j, 0, 0};
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {i, 0, 0, i, 0};
    for (std::size_t j = 1; j <= m; ++j) {
      Cell best = prev[j - 1];
      if (eq(ref[i - 1], hyp[j - 1])) {
        ++best.hits;
      } else {
        ++best.cost;
        ++best.subs;
      }
      Cell del = prev[j];
      ++del.cost;
      ++del.del;
      if (del.better_than(best)) best = del;
      Cell ins = cur[j - 1];
      ++ins.cost;
      ++ins.ins;
      if (ins.better_than(best)) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell& c = prev[m];
  return {c.subs, c.ins, c.del, c.hits, n};
}

template <typename T, typename Eq = std::equal_to<>>
EditCounts edit_distance(const std::vector<T>& ref, const std::vector<T>& hyp, Eq eq = {}) {
  return edit_distance(std::span<const T>(ref), std::span<const T>(hyp), eq);
}

/// 100 * errors / reference length; undefined for an empty reference.
inline std::optional<double> error_rate(const EditCounts& c) {
  if (c.reference_length == 0) return std::nullopt;
  return 100.0 * static_cast<double>(c.errors()) / static_cast<double>(c.reference_length);
}

/// Pooled word error rate over utterances.
inline std::optional<double> wer(const std::vector<std::vector<std::string>>& refs,
                                 const std::vector<std::vector<std::string>>& hyps) {
  if (refs.size() != hyps.size()) {
    throw InputError("wer: " + std::to_string(refs.size()) + " references but " +
                     std::to_string(hyps.size()) + " hypotheses");
  }
  EditCounts total;
  for (std::size_t i = 0; i < refs.size(); ++i) total += edit_distance(refs[i], hyps[i]);
  return error_rate(total);
}

/// Level equality for scoring: Unassigned never matches anything.
inline bool level_match(const LevelHyp& a, const LevelHyp& b) { return a && b && *a == *b; }

inline EditCounts level_edits(const std::vector<LevelHyp>& ref, const std::vector<LevelHyp>& hyp) {
  return edit_distance(ref, hyp, level_match);
}

/// Prominence error rate: WER arithmetic over level sequences.
inline std::optional<double> per(const std::vector<std::vector<LevelHyp>>& refs,
                                 const std::vector<std::vector<LevelHyp>>& hyps) {
  if (refs.size() != hyps.size()) {
    throw InputError("per: " + std::to_string(refs.size()) + " references but " +
                     std::to_string(hyps.size()) + " hypotheses");
  }
  EditCounts total;
  for (std::size_t i = 0; i < refs.size(); ++i) total += level_edits(refs[i], hyps[i]);
  return error_rate(total);
}

inline bool align_gate(std::size_t ref_word_count, std::size_t hyp_word_count) {
  return ref_word_count == hyp_word_count;
}

inline std::optional<double> percent_aligned(std::size_t gated, std::size_t total) {
  if (total == 0) return std::nullopt;
  return 100.0 * static_cast<double>(gated) / static_cast<double>(total);
}

inline std::optional<double> percent_aligned(const std::vector<bool>& gated) {
  std::size_t n = 0;
  for (bool g : gated) n += g;
  return percent_aligned(n, gated.size());
}

// ---------------------------------------------------------------------------
// Word-level accuracy on gated utterances

/// Reference level (rows PL0..PL2) x hypothesis (PL0..PL2, Unassigned).
struct ConfusionMatrix {
  static constexpr int kUnassigned = 3;
  std::array<std::array<std::uint64_t, 4>, 3> counts{};

  void add(ProminenceLevel ref, const LevelHyp& hyp) {
    ++counts[level_index(ref)][hyp ? level_index(*hyp) : kUnassigned];
  }
  std::uint64_t row_total(int r) const {
    std::uint64_t s = 0;
    for (auto c : counts[r]) s += c;
    return s;
  }
  std::uint64_t column_total(int c) const {
    std::uint64_t s = 0;
    for (const auto& row : counts) s += row[c];
    return s;
  }
  std::uint64_t total() const { return row_total(0) + row_total(1) + row_total(2); }
  std::uint64_t trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

  /// Row-normalized view; empty rows stay all-zero.
  std::array<std::array<double, 4>, 3> normalized() const {
    std::array<std::array<double, 4>, 3> out{};
    for (int r = 0; r < 3; ++r) {
      const auto n = row_total(r);
      if (n == 0) continue;
      for (int c = 0; c < 4; ++c) out[r][c] = static_cast<double>(counts[r][c]) / static_cast<double>(n);
    }
    return out;
  }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) counts[r][c] += o.counts[r][c];
    return *this;
  }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct AccuracyResult {
  ConfusionMatrix confusion;
  std::optional<double> accuracy;              // percent
  std::array<std::optional<double>, 3> recall;  // percent, per reference level
  std::array<std::optional<double>, 3> precision;
  std::array<std::optional<double>, 3> f1;
};

inline AccuracyResult accuracy_from_confusion(const ConfusionMatrix& cm) {
  AccuracyResult r;
  r.confusion = cm;
  if (cm.total() > 0) {
    r.accuracy = 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  }
  for (int l = 0; l < 3; ++l) {
    const double hit = static_cast<double>(cm.counts[l][l]);
    if (auto n = cm.row_total(l)) r.recall[l] = 100.0 * hit / static_cast<double>(n);
    if (auto n = cm.column_total(l)) r.precision[l] = 100.0 * hit / static_cast<double>(n);
    if (r.recall[l] && r.precision[l]) {
      const double p = *r.precision[l], q = *r.recall[l];
      r.f1[l] = p + q > 0.0 ? 2.0 * p * q / (p + q) : 0.0;
    }
  }
  return r;
}

/// Position-wise comparison over utterances that passed align_gate.
/// Unassigned hypotheses count as errors in their own confusion column.
inline AccuracyResult aligned_accuracy(const std::vector<std::vector<LevelHyp>>& refs,
                                       const std::vector<std::vector<LevelHyp>>& hyps) {
  if (refs.size() != hyps.size()) throw InputError("aligned_accuracy: utterance count mismatch");
  ConfusionMatrix cm;
  for (std::size_t u = 0; u < refs.size(); ++u) {
    if (!align_gate(refs[u].size(), hyps[u].size())) {
      throw InputError("aligned_accuracy: utterance " + std::to_string(u) + " did not pass the alignment gate");
    }
    for (std::size_t i = 0; i < refs[u].size(); ++i) {
      if (!refs[u][i]) throw InputError("aligned_accuracy: reference level missing");
      cm.add(*refs[u][i], hyps[u][i]);
    }
  }
  return accuracy_from_confusion(cm);
}

// ---------------------------------------------------------------------------
// Reports

/// Half-up rounding to `digits` decimals.
inline double round_half_up(double x, int digits = 2) {
  const double scale = std::pow(10.0, digits);
  const double scaled = x * scale;
  // Nudge values like 63.475 that sit just below the half in binary.
  return std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::abs(scaled))) / scale;
}

inline std::string format_fixed(std::optional<double> x, int digits = 2) {
  if (!x) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, round_half_up(*x, digits));
  return buf;
}

using Metrics = std::map<std::string, std::optional<double>>;

struct UtteranceRecord {
  std::string id;
  std::string speaker;
  int fold = -1;
  std::optional<EditCounts> word_edits;
  std::optional<std::vector<LevelHyp>> ref_levels;
  std::optional<std::vector<LevelHyp>> hyp_levels;

  bool has_levels() const { return ref_levels && hyp_levels; }
  bool aligned() const { return has_levels() && align_gate(ref_levels->size(), hyp_levels->size()); }
  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

struct MeanStd {
  std::optional<double> mean;
  std::optional<double> std;  // sample (n-1) standard deviation
  std::size_t n = 0;
  friend bool operator==(const MeanStd&, const MeanStd&) = default;
};

/// Mean and sample standard deviation of the defined values.
inline MeanStd mean_std(const std::vector<std::optional<double>>& values) {
  MeanStd r;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++r.n;
    }
  }
  if (r.n == 0) return r;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n < 2) return r;
  double ss = 0.0;
  for (const auto& v : values) {
    if (v) ss += (*v - *r.mean) * (*v - *r.mean);
  }
  r.std = std::sqrt(ss / static_cast<double>(r.n - 1));
  return r;
}

struct FoldSummary {
  int fold = 0;
  Metrics metrics;
};

struct EvalReport {
  std::string name;
  std::vector<UtteranceRecord> utterances;
  Metrics metrics;
  ConfusionMatrix confusion;
  std::vector<FoldSummary> folds;
  std::map<std::string, MeanStd> fold_stats;
};

/// Pooled metrics of a set of utterance records.
inline std::pair<Metrics, ConfusionMatrix> summarize(const std::vector<UtteranceRecord>& records) {
  Metrics m;
  ConfusionMatrix cm;
  EditCounts words, levels;
  bool any_words = false, any_levels = false;
  std::size_t leveled = 0, gated = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> by_speaker;  // gated, total
  for (const auto& r : records) {
    if (r.word_edits) {
      any_words = true;
      words += *r.word_edits;
    }
    if (!r.has_levels()) continue;
    any_levels = true;
    ++leveled;
    levels += level_edits(*r.ref_levels, *r.hyp_levels);
    auto& sp = by_speaker[r.speaker];
    ++sp.second;
    if (!r.aligned()) continue;
    ++gated;
    ++sp.first;
    for (std::size_t i = 0; i < r.ref_levels->size(); ++i) {
      if ((*r.ref_levels)[i]) cm.add(*(*r.ref_levels)[i], (*r.hyp_levels)[i]);
    }
  }
  m["utterances"] = static_cast<double>(records.size());
  if (any_words) m["WER"] = error_rate(words);
  if (any_levels) {
    const auto acc = accuracy_from_confusion(cm);
    m["PER"] = error_rate(levels);
    m["%Aligned"] = percent_aligned(gated, leveled);
    m["Accuracy"] = acc.accuracy;
    m["gated_utterances"] = static_cast<double>(gated);
    m["gated_words"] = static_cast<double>(cm.total());
    for (int l = 0; l < 3; ++l) {
      const std::string suffix = "_PL" + std::to_string(l);
      m["Recall" + suffix] = acc.recall[l];
      m["F1" + suffix] = acc.f1[l];
    }
    std::vector<std::optional<double>> per_speaker;
    for (const auto& [spk, c] : by_speaker) per_speaker.push_back(percent_aligned(c.first, c.second));
    const auto ms = mean_std(per_speaker);
    m["%Aligned_speaker_mean"] = ms.mean;
    m["%Aligned_speaker_std"] = ms.std;
  }
  return {m, cm};
}

inline EvalReport make_report(std::string name, std::vector<UtteranceRecord> records) {
  EvalReport r;
  r.name = std::move(name);
  r.utterances = std::move(records);
  std::tie(r.metrics, r.confusion) = summarize(r.utterances);
  return r;
}

/// Pools per-fold reports: utterances are concatenated (tagged with their
/// fold), pooled metrics recomputed, and every metric gets a mean and
/// sample standard deviation over the folds.
inline EvalReport aggregate_folds(const std::vector<EvalReport>& reports, std::string name = {}) {
  if (reports.size() < 2) throw InputError("aggregate_folds needs at least two reports");
  EvalReport out;
  out.name = name.empty() ? reports.front().name : std::move(name);
  std::set<std::string> keys;
  for (std::size_t f = 0; f < reports.size(); ++f) {
    for (auto rec : reports[f].utterances) {
      if (rec.fold < 0) rec.fold = static_cast<int>(f);
      out.utterances.push_back(std::move(rec));
    }
    out.folds.push_back({static_cast<int>(f), reports[f].metrics});
    for (const auto& [k, v] : reports[f].metrics) keys.insert(k);
  }
  std::tie(out.metrics, out.confusion) = summarize(out.utterances);
  // A fold without any scorable utterance reports the metric as null.
  for (auto& f : out.folds)
    for (const auto& k : keys) f.metrics.try_emplace(k, std::nullopt);
  for (const auto& k : keys) {
    std::vector<std::optional<double>> values;
    for (const auto& r : reports) {
      auto it = r.metrics.find(k);
      values.push_back(it == r.metrics.end() ? std::nullopt : it->second);
    }
    out.fold_stats[k] = mean_std(values);
  }
  return out;
}

// JSON ----------------------------------------------------------------------

inline nlohmann::json opt_json(const std::optional<double>& x) {
  return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

inline std::optional<double> opt_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline nlohmann::json metrics_json(const Metrics& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[k] = opt_json(v);
  return j;
}

inline nlohmann::json to_json(const UtteranceRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["speaker"] = r.speaker;
  j["fold"] = r.fold;
  if (r.word_edits) {
    const auto& e = *r.word_edits;
    j["word_edits"] = {{"S", e.substitutions}, {"I", e.insertions}, {"D", e.deletions},
                       {"H", e.hits},          {"N", e.reference_length}};
  }
  if (r.has_levels()) {
    j["ref_levels"] = render_levels(*r.ref_levels);
    j["hyp_levels"] = render_levels(*r.hyp_levels);
    j["aligned"] = r.aligned();
  }
  return j;
}

inline UtteranceRecord record_from_json(const nlohmann::json& j) {
  UtteranceRecord r;
  r.id = j.at("id").get<std::string>();
  r.speaker = j.value("speaker", std::string());
  r.fold = j.value("fold", -1);
  if (j.contains("word_edits")) {
    const auto& e = j.at("word_edits");
    r.word_edits = EditCounts{e.at("S").get<std::uint64_t>(), e.at("I").get<std::uint64_t>(),
                              e.at("D").get<std::uint64_t>(), e.at("H").get<std::uint64_t>(),
                              e.at("N").get<std::uint64_t>()};
  }
  if (j.contains("ref_levels")) {
    r.ref_levels = parse_levels(j.at("ref_levels").get<std::string>());
    r.hyp_levels = parse_levels(j.at("hyp_levels").get<std::string>());
  }
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["metrics"] = metrics_json(r.metrics);
  nlohmann::json cm = nlohmann::json::array();
  for (const auto& row : r.confusion.counts) cm.push_back(row);
  j["confusion"] = {{"rows", {"PL0", "PL1", "PL2"}}, {"columns", {"PL0", "PL1", "PL2", "?"}}, {"counts", cm}};
  if (!r.folds.empty()) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : r.folds) folds.push_back({{"fold", f.fold}, {"metrics", metrics_json(f.metrics)}});
    j["folds"] = std::move(folds);
    nlohmann::json stats = nlohmann::json::object();
    for (const auto& [k, s] : r.fold_stats) {
      stats[k] = {{"mean", opt_json(s.mean)}, {"std", opt_json(s.std)}, {"n", s.n}};
    }
    j["fold_stats"] = std::move(stats);
  }
  nlohmann::json utts = nlohmann::json::array();
  for (const auto& u : r.utterances) utts.push_back(to_json(u));
  j["utterances"] = std::move(utts);
  return j;
}

// Text table ----------------------------------------------------------------

struct TableRow {
  std::string type;
  std::string test_set;
  const EvalReport* report = nullptr;
};

/// "Type | Test set | PER | %Aligned | Accuracy"; cross-validated rows show
/// mean±std over folds, single test sets the pooled value.
inline std::string render_table(const std::vector<TableRow>& rows) {
  auto cell = [](const EvalReport& r, const std::string& key) -> std::string {
    if (!r.folds.empty()) {
      auto it = r.fold_stats.find(key);
      if (it == r.fold_stats.end()) return "n/a";
      if (!it->second.std) return format_fixed(it->second.mean);
      return format_fixed(it->second.mean) + "±" + format_fixed(it->second.std);
    }
    auto it = r.metrics.find(key);
    return it == r.metrics.end() ? "n/a" : format_fixed(it->second);
  };
  std::vector<std::array<std::string, 5>> cells{{"Type", "Test set", "PER", "%Aligned", "Accuracy"}};
  for (const auto& row : rows) {
    cells.push_back({row.type, row.test_set, cell(*row.report, "PER"), cell(*row.report, "%Aligned"),
                     cell(*row.report, "Accuracy")});
  }
  std::array<std::size_t, 5> width{};
  auto display_width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  for (const auto& r : cells)
    for (int c = 0; c < 5; ++c) width[c] = std::max(width[c], display_width(r[c]));
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (int c = 0; c < 5; ++c) {
      if (c) out += " | ";
      out += cells[i][c];
      if (c < 4) out.append(width[c] - display_width(cells[i][c]), ' ');
    }
    out += '\n';
    if (i == 0) {
      for (int c = 0; c < 5; ++c) {
        if (c) out += "-+-";
        out.append(width[c], '-');
      }
      out += '\n';
    }
  }
  return out;
}

/// WER table of the three decoding regimes.
inline std::string render_wer_table(const std::string& type, const EvalReport& lexfree,
                                    const EvalReport& lex, const EvalReport& lm) {
  auto cell = [](const EvalReport& r) {
    if (!r.folds.empty()) {
      auto it = r.fold_stats.find("WER");
      if (it != r.fold_stats.end()) {
        return it->second.std ? format_fixed(it->second.mean) + "±" + format_fixed(it->second.std)
                              : format_fixed(it->second.mean);
      }
    }
    auto it = r.metrics.find("WER");
    return it == r.metrics.end() ? std::string("n/a") : format_fixed(it->second);
  };
  return "Type | Lexfree | Lex | 3-gram\n" + type + " | " + cell(lexfree) + " | " + cell(lex) + " | " +
         cell(lm) + "\n";
}

}  // namespace promdec
