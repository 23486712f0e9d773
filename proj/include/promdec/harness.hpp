// promdec/harness.hpp

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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promdec/corpus.hpp"
#include "promdec/decoder.hpp"
#include "promdec/emissions.hpp"
#include "promdec/error.hpp"
#include "promdec/lm.hpp"
#include "promdec/metrics.hpp"
#include "promdec/parallel.hpp"
#include "promdec/prominence.hpp"
#include "promdec/vocab.hpp"

namespace promdec {

// ---------------------------------------------------------------------------
// Folds

/// Conversation-level k-fold split; holdout conversations belong to no fold.
struct FoldPlan {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::set<std::string> holdout_conversations;
  std::map<std::string, int> conversation_fold;
  std::map<std::string, int> assignment;  // utterance id -> fold

  std::optional<int> fold_of(const std::string& utterance_id) const {
    auto it = assignment.find(utterance_id);
    if (it == assignment.end()) return std::nullopt;
    return it->second;
  }
};

inline FoldPlan make_folds(const Corpus& corpus, std::size_t k, std::uint64_t seed,
                           const std::set<std::string>& holdout = {}) {
  if (k < 2) throw InputError("make_folds: k must be at least 2");
  std::set<std::string> convs;
  for (const auto& u : corpus) {
    if (!holdout.count(u.conversation_id)) convs.insert(u.conversation_id);
  }
  if (convs.size() < k) {
    throw InputError("make_folds: " + std::to_string(convs.size()) + " conversations cannot fill " +
                     std::to_string(k) + " folds");
  }
  std::vector<std::string> order(convs.begin(), convs.end());
  SplitRng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.holdout_conversations = holdout;
  for (std::size_t i = 0; i < order.size(); ++i) plan.conversation_fold[order[i]] = static_cast<int>(i % k);
  for (const auto& u : corpus) {
    auto it = plan.conversation_fold.find(u.conversation_id);
    if (it != plan.conversation_fold.end()) plan.assignment[u.id] = it->second;
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  TaggingMode mode = TaggingMode::Det02;
  DecodeConfig decode;
  bool use_lm = true;
  int lm_order = lm::kMaxOrder;
  std::filesystem::path emissions_dir;
  std::optional<Lexicon> lexicon;  // default: every word of the corpus
  FoldPlan plan;
  std::size_t threads = 1;
};

inline std::filesystem::path emission_path(const std::filesystem::path& dir, const std::string& utterance_id) {
  return dir / (utterance_id + ".promem");
}

/// Checks that every token of a sidecar vocabulary belongs to the mode's
/// alphabet.
inline void check_vocab_mode(const TokenSet& vocab, TaggingMode mode) {
  for (const auto& t : vocab.tokens()) {
    bool ok = true;
    if (t.is_level()) {
      ok = is_detector_mode(mode) && mode_uses_level(mode, *t.tag);
    } else if (t.is_char()) {
      ok = !is_detector_mode(mode) && (!t.tag || mode_uses_level(mode, *t.tag));
    }
    if (!ok) {
      throw FormatError("vocabulary token " + t.text() + " is not valid for mode " + std::string(mode_name(mode)));
    }
  }
}

struct LoadedEmissions {
  EmissionMatrix matrix;
  TokenSet vocab;
};

inline LoadedEmissions load_emissions(const RunConfig& cfg, const std::string& utterance_id) {
  const auto path = emission_path(cfg.emissions_dir, utterance_id);
  if (!std::filesystem::exists(path)) {
    throw Error("missing emissions for utterance " + utterance_id + " (" + path.string() + ")");
  }
  auto [m, v] = read_emissions_with_vocab(path);
  check_vocab_mode(v, cfg.mode);
  return {std::move(m), std::move(v)};
}

// ---------------------------------------------------------------------------
// Detector evaluation

struct DetectorEvalResult {
  std::optional<EvalReport> crossval;  // pooled over folds, with fold statistics
  std::optional<EvalReport> holdout;
  std::string holdout_set;  // "/"-joined held-out conversation ids
  std::size_t skipped = 0;  // utterances the mode cannot express
};

/// Greedy-decodes detector emissions, extracts one level per detected word
/// and scores PER, %Aligned and gated accuracy per fold.
inline DetectorEvalResult run_detector_eval(const Corpus& corpus, const RunConfig& cfg) {
  if (!is_detector_mode(cfg.mode)) throw InputError("run_detector_eval needs a Det mode");
  std::vector<const Utterance*> eval;
  DetectorEvalResult result;
  for (const auto& u : corpus) {
    try {
      (void)detector_reference(u, cfg.mode);
    } catch (const ModeError&) {
      ++result.skipped;
      continue;
    } catch (const IncompleteAnnotationError&) {
      ++result.skipped;
      continue;
    }
    if (cfg.plan.fold_of(u.id) || cfg.plan.holdout_conversations.count(u.conversation_id)) eval.push_back(&u);
  }
  auto records = parallel_map(eval.size(), cfg.threads, [&](std::size_t i) {
    const Utterance& u = *eval[i];
    const auto em = load_emissions(cfg, u.id);
    const Hypothesis h = greedy_decode(em.matrix, em.vocab.blank_id());
    const auto tokens = em.vocab.decode(h.tokens);
    UtteranceRecord r;
    r.id = u.id;
    r.speaker = u.speaker_id;
    r.fold = cfg.plan.fold_of(u.id).value_or(-1);
    r.ref_levels = u.prosodic_levels();
    r.hyp_levels = extract_sequence(std::span<const Token>(tokens));
    return r;
  });
  std::vector<std::vector<UtteranceRecord>> per_fold(cfg.plan.k);
  std::vector<UtteranceRecord> held;
  for (auto& r : records) {
    if (r.fold >= 0) {
      per_fold[r.fold].push_back(std::move(r));
    } else {
      held.push_back(std::move(r));
    }
  }
  const std::string name(mode_name(cfg.mode));
  if (!cfg.plan.assignment.empty()) {
    std::vector<EvalReport> reports;
    for (std::size_t f = 0; f < per_fold.size(); ++f) {
      reports.push_back(make_report(name + " fold " + std::to_string(f), std::move(per_fold[f])));
    }
    result.crossval = aggregate_folds(reports, name + " " + std::to_string(cfg.plan.k) + "-fold CV");
  }
  if (!cfg.plan.holdout_conversations.empty()) {
    std::string sets;
    for (const auto& c : cfg.plan.holdout_conversations) sets += (sets.empty() ? "" : "/") + c;
    result.holdout = make_report(name + " " + sets, std::move(held));
    result.holdout_set = sets;
  }
  return result;
}

// ---------------------------------------------------------------------------
// ASR evaluation

/// One report per decoding regime; `lexfree` also carries prominence
/// metrics extracted from the tagged greedy output.
struct AsrReports {
  EvalReport lexfree;
  EvalReport lex;
  std::optional<EvalReport> lm;
};

struct AsrEvalResult {
  std::optional<AsrReports> crossval;
  std::optional<AsrReports> holdout;
  std::string holdout_set;
  std::size_t excluded = 0;  // utterances dropped by filter_corpus
};

/// True when every word carries a level the mode tags, so the reference
/// level sequence is recoverable from the mode's reference string.
inline bool prominence_scorable(const Utterance& u, TaggingMode mode) {
  if (mode == TaggingMode::Baseline || !u.fully_annotated()) return false;
  return std::all_of(u.prosodic_words.begin(), u.prosodic_words.end(),
                     [&](const ProsodicWord& pw) { return mode_uses_level(mode, *pw.level); });
}

namespace detail {

struct AsrUtteranceResult {
  UtteranceRecord lexfree, lex;
  std::optional<UtteranceRecord> lm;
};

inline lm::NGramModel train_split_lm(const std::vector<const Utterance*>& train, int order) {
  std::vector<lm::Sentence> sentences;
  for (const auto* u : train) sentences.push_back(u->words());
  if (sentences.empty()) throw InputError("no training sentences for the language model");
  lm::MknOptions opt;
  opt.degenerate_fallback = true;
  return lm::train(sentences, order, opt);
}

inline AsrReports build_asr_reports(const std::string& name, std::vector<std::vector<AsrUtteranceResult>> groups,
                                    bool with_lm, bool folds) {
  std::vector<EvalReport> lexfree, lex, lmr;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<UtteranceRecord> a, b, c;
    for (auto& r : groups[g]) {
      a.push_back(std::move(r.lexfree));
      b.push_back(std::move(r.lex));
      if (r.lm) c.push_back(std::move(*r.lm));
    }
    const std::string suffix = folds ? " fold " + std::to_string(g) : "";
    lexfree.push_back(make_report(name + " Lexfree" + suffix, std::move(a)));
    lex.push_back(make_report(name + " Lex" + suffix, std::move(b)));
    if (with_lm) lmr.push_back(make_report(name + " 3-gram" + suffix, std::move(c)));
  }
  AsrReports out;
  if (folds) {
    out.lexfree = aggregate_folds(lexfree, name + " Lexfree");
    out.lex = aggregate_folds(lex, name + " Lex");
    if (with_lm) out.lm = aggregate_folds(lmr, name + " 3-gram");
  } else {
    out.lexfree = std::move(lexfree.front());
    out.lex = std::move(lex.front());
    if (with_lm) out.lm = std::move(lmr.front());
  }
  return out;
}

}  // namespace detail

/// Decodes ASR emissions with the three regimes (Lexfree greedy over the
/// tagged alphabet, lexicon beam search, lexicon + 3-gram beam search) and
/// scores WER; Lexfree output also yields prominence PER and gated accuracy
/// against the reference levels of fully annotated utterances.
inline AsrEvalResult run_asr_eval(const Corpus& raw_corpus, const RunConfig& cfg) {
  if (is_detector_mode(cfg.mode)) throw InputError("run_asr_eval needs Baseline or a Tag mode");
  const Corpus corpus = filter_corpus(raw_corpus);
  AsrEvalResult result;
  result.excluded = raw_corpus.size() - corpus.size();
  const Lexicon lexicon = cfg.lexicon ? *cfg.lexicon : build_lexicon(corpus);
  const LexiconTrie trie(lexicon);

  // Test groups: folds 0..k-1, then the holdout set.
  const std::size_t k = cfg.plan.assignment.empty() ? 0 : cfg.plan.k;
  const bool has_holdout = !cfg.plan.holdout_conversations.empty();
  const std::size_t groups = k + (has_holdout ? 1 : 0);
  std::vector<std::vector<const Utterance*>> test(groups), train(groups);
  for (const auto& u : corpus) {
    const auto fold = cfg.plan.fold_of(u.id);
    const bool held = cfg.plan.holdout_conversations.count(u.conversation_id) > 0;
    for (std::size_t f = 0; f < k; ++f) {
      if (fold && static_cast<std::size_t>(*fold) == f) {
        test[f].push_back(&u);
      } else if (!held) {
        train[f].push_back(&u);
      }
    }
    if (has_holdout) (held ? test[k] : train[k]).push_back(&u);
  }
  std::vector<std::optional<lm::NGramModel>> lms(groups);
  if (cfg.use_lm) {
    for (std::size_t g = 0; g < groups; ++g) {
      if (!test[g].empty()) lms[g] = detail::train_split_lm(train[g], cfg.lm_order);
    }
  }

  std::vector<std::pair<std::size_t, const Utterance*>> jobs;
  for (std::size_t g = 0; g < groups; ++g)
    for (const auto* u : test[g]) jobs.emplace_back(g, u);

  auto outcomes = parallel_map(jobs.size(), cfg.threads, [&](std::size_t i) {
    const auto [g, u] = jobs[i];
    const auto em = load_emissions(cfg, u->id);
    const auto ref_words = u->words();
    const int fold = g < k ? static_cast<int>(g) : -1;
    auto base_record = [&] {
      UtteranceRecord r;
      r.id = u->id;
      r.speaker = u->speaker_id;
      r.fold = fold;
      return r;
    };
    detail::AsrUtteranceResult out{base_record(), base_record(), std::nullopt};

    const Hypothesis greedy = decode_lexfree_tagged(em.matrix, em.vocab);
    out.lexfree.word_edits = edit_distance(ref_words, tokens_to_words(greedy.tokens, em.vocab));
    if (prominence_scorable(*u, cfg.mode)) {
      const auto tokens = em.vocab.decode(greedy.tokens);
      const auto levels = u->word_levels();
      out.lexfree.ref_levels = std::vector<LevelHyp>(levels.begin(), levels.end());
      out.lexfree.hyp_levels = extract_sequence(std::span<const Token>(tokens));
    }

    const TokenSet base = strip_tags(em.vocab);
    const EmissionMatrix marg = em.vocab.has_tags() ? marginalize_tags(em.matrix, em.vocab, base) : em.matrix;
    DecodeConfig dc = cfg.decode;
    dc.mode = DecodeMode::Lex;
    out.lex.word_edits = edit_distance(ref_words, beam_decode(marg, base, trie, nullptr, dc).words);
    if (lms[g]) {
      dc.mode = DecodeMode::LMBeam;
      out.lm = base_record();
      out.lm->word_edits = edit_distance(ref_words, beam_decode(marg, base, trie, &*lms[g], dc).words);
    }
    return out;
  });

  std::vector<std::vector<detail::AsrUtteranceResult>> grouped(groups);
  for (std::size_t i = 0; i < jobs.size(); ++i) grouped[jobs[i].first].push_back(std::move(outcomes[i]));
  const std::string name(mode_name(cfg.mode));
  if (k > 0) {
    std::vector<std::vector<detail::AsrUtteranceResult>> folds(grouped.begin(), grouped.begin() + static_cast<std::ptrdiff_t>(k));
    result.crossval = detail::build_asr_reports(name, std::move(folds), cfg.use_lm, true);
  }
  if (has_holdout) {
    std::string sets;
    for (const auto& c : cfg.plan.holdout_conversations) sets += (sets.empty() ? "" : "/") + c;
    std::vector<std::vector<detail::AsrUtteranceResult>> held;
    held.push_back(std::move(grouped[k]));
    result.holdout = detail::build_asr_reports(name + " " + sets, std::move(held), cfg.use_lm, false);
    result.holdout_set = sets;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Report documents

inline nlohmann::json config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["mode"] = std::string(mode_name(cfg.mode));
  j["k"] = cfg.plan.k;
  j["seed"] = cfg.plan.seed;
  j["holdout"] = cfg.plan.holdout_conversations;
  j["beam_width"] = cfg.decode.beam_width;
  j["lm_weight"] = cfg.decode.lm_weight;
  j["word_bonus"] = cfg.decode.word_bonus;
  j["use_lm"] = cfg.use_lm;
  j["lm_order"] = cfg.lm_order;
  nlohmann::json folds = nlohmann::json::object();
  for (const auto& [c, f] : cfg.plan.conversation_fold) folds[c] = f;
  j["conversation_folds"] = std::move(folds);
  return j;
}

inline nlohmann::json to_json(const DetectorEvalResult& r, const RunConfig& cfg) {
  nlohmann::json j;
  j["task"] = "detector";
  j["config"] = config_json(cfg);
  j["skipped_utterances"] = r.skipped;
  nlohmann::json reports = nlohmann::json::array();
  if (r.crossval) reports.push_back(to_json(*r.crossval));
  if (r.holdout) reports.push_back(to_json(*r.holdout));
  j["reports"] = std::move(reports);
  return j;
}

inline nlohmann::json to_json(const AsrReports& r) {
  nlohmann::json j;
  j["lexfree"] = to_json(r.lexfree);
  j["lex"] = to_json(r.lex);
  j["lm"] = r.lm ? to_json(*r.lm) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const AsrEvalResult& r, const RunConfig& cfg) {
  nlohmann::json j;
  j["task"] = "asr";
  j["config"] = config_json(cfg);
  j["excluded_utterances"] = r.excluded;
  j["crossval"] = r.crossval ? to_json(*r.crossval) : nlohmann::json(nullptr);
  j["holdout"] = r.holdout ? to_json(*r.holdout) : nlohmann::json(nullptr);
  return j;
}

inline std::string render_table(const DetectorEvalResult& r, TaggingMode mode) {
  std::vector<TableRow> rows;
  const std::string type = mode == TaggingMode::Det02 ? "PDET02" : "PDET012";
  if (r.crossval) rows.push_back({type, std::to_string(r.crossval->folds.size()) + "-fold CV", &*r.crossval});
  if (r.holdout) rows.push_back({type, r.holdout_set, &*r.holdout});
  return render_table(rows);
}

inline std::string render_table(const AsrEvalResult& r, TaggingMode mode) {
  std::string out;
  const std::string type(mode_name(mode));
  auto block = [&](const AsrReports& reps, const std::string& set) {
    const EvalReport empty;
    out += "[" + set + "]\n";
    out += render_wer_table(type, reps.lexfree, reps.lex, reps.lm ? *reps.lm : empty);
    if (mode != TaggingMode::Baseline) out += render_table({{type + " (Lexfree)", set, &reps.lexfree}});
  };
  if (r.crossval) block(*r.crossval, std::to_string(r.crossval->lexfree.folds.size()) + "-fold CV");
  if (r.holdout) block(*r.holdout, r.holdout_set);
  return out;
}

}  // namespace promdec
