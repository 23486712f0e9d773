// tests/acceptance.cpp

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

// Acceptance suite: one PASS/FAIL line per criterion. Usage:
//   acceptance <path-to-promdec-binary>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "promdec/promdec.hpp"

namespace promdec {
namespace {

using oracle::Seq;

struct Outcome {
  bool ok = true;
  std::string detail;
};

/// Collects the first few failure messages of a criterion.
class Check {
 public:
  void expect(bool cond, const std::string& what) {
    ++checks_;
    if (cond) return;
    ++failures_;
    if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary + " (" + std::to_string(checks_) + " checks)"};
    return {false, std::to_string(failures_) + "/" + std::to_string(checks_) + " checks failed: " + messages_};
  }

 private:
  std::size_t checks_ = 0, failures_ = 0;
  std::string messages_;
};

std::string quote(const std::string& s) { return "\"" + s + "\""; }

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(rc);
#else
  return rc;
#endif
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TokenSet char_vocab(std::size_t v) {
  std::set<Token> s;
  for (std::size_t i = 0; i + 2 < v; ++i) s.insert(Token::character(U'a' + static_cast<char32_t>(i)));
  return TokenSet::canonical(s);
}

// ---------------------------------------------------------------------------

Outcome reference_fidelity() {
  using fixtures::make_utterance;
  Check c;
  auto expect_eq = [&](const std::string& got, const std::string& want, const std::string& row) {
    c.expect(got == want, row + " gave \"" + got + "\"");
  };
  const auto sie = make_utterance({{"sie hat", 0}, {"erzählt", 2}});
  const auto wah = make_utterance({{"wah", 0}, {"voll", 2}, {"nett", 1}});
  const auto die = make_utterance({{"die", 0}, {"waren", 0}, {"alle", 2}});
  expect_eq(detector_reference(sie, TaggingMode::Det02), "|0 |2 |", "Det02");
  expect_eq(detector_reference(wah, TaggingMode::Det012), "|0 |2 |1 |", "Det012");
  expect_eq(asr_reference(die, TaggingMode::Tag02), "|d0 i0 e0 |w0 a0 r0 e0 n0 |a2 l2 l2 e2 |", "Tag02");
  expect_eq(asr_reference(die, TaggingMode::Tag0), "|d0 i0 e0 |w0 a0 r0 e0 n0 |a l l e |", "Tag0");
  expect_eq(asr_reference(die, TaggingMode::Tag2), "|d i e |w a r e n |a2 l2 l2 e2 |", "Tag2");
  expect_eq(asr_reference(die, TaggingMode::Baseline), "|d i e |w a r e n |a l l e |", "Baseline");
  expect_eq(asr_reference(die, TaggingMode::Tag012), "|d0 i0 e0 |w0 a0 r0 e0 n0 |a2 l2 l2 e2 |", "Tag012");
  return c.outcome("7 table rows byte-exact");
}

LevelHyp brute_force_vote(const std::string& digits) {
  std::array<int, 3> n{};
  for (char d : digits) ++n[d - '0'];
  for (int l = 0; l < 3; ++l) {
    bool beats_all = n[l] > 0;
    for (int o = 0; o < 3; ++o) beats_all = beats_all && (o == l || n[l] > n[o]);
    if (beats_all) return static_cast<ProminenceLevel>(l);
  }
  return std::nullopt;
}

Outcome majority_vote() {
  Check c;
  c.expect(extract_sequence("|d0 i0 e0 |", TaggingMode::Tag02) == std::vector<LevelHyp>{ProminenceLevel::PL0},
           "\"000\" is not PL0");
  c.expect(extract_sequence("|d0 i1 |", TaggingMode::Tag012) == std::vector<LevelHyp>{std::nullopt},
           "\"01\" is not Unassigned");
  std::mt19937_64 rng(2024);
  const char32_t letters[] = U"abcdefghij";
  for (int i = 0; i < 10000; ++i) {
    std::string digits(rng() % 10, '0'), hyp = "|";
    for (auto& d : digits) {
      d = static_cast<char>('0' + rng() % 3);
      hyp += unicode::encode(letters[rng() % 10]) + d + " ";
    }
    hyp += "|";
    const auto got = extract_sequence(hyp, TaggingMode::Tag012);
    const auto want = brute_force_vote(digits);
    if (digits.empty()) {
      c.expect(got.empty(), "empty segment produced a level");
    } else {
      c.expect(got.size() == 1 && got[0] == want, "\"" + digits + "\" disagrees with the vote oracle");
    }
  }
  return c.outcome("worked examples + 10000 random tag strings");
}

Outcome ctc_oracle_equivalence() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  std::size_t compared_scores = 0;
  for (std::uint64_t seed = 1; seed <= 240; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t frames = seed % 4 == 0 ? 8 : 1 + rng() % 8;
    const std::size_t v = seed % 4 == 0 ? 5 : 3 + rng() % 3;
    const TokenSet vocab = char_vocab(v);
    const auto e = oracle::random_emissions(frames, v, rng, 1.0 + static_cast<double>(rng() % 3));
    const auto dist = oracle::output_distribution(e);
    for (const auto& [seq, p] : dist) {
      ++compared_scores;
      const double s = ctc_score(e, seq);
      c.expect(std::abs(s - std::log(p)) <= 1e-10, "ctc_score off for seed " + std::to_string(seed));
    }
    const auto words = oracle::random_words(vocab, rng, 4, 3);
    Lexicon lex;
    for (const auto& w : words) lex.add(unicode::encode(w));
    const LexiconTrie trie(lex);
    DecodeConfig cfg;
    cfg.beam_width = 1u << 30;
    const auto beam = beam_decode(e, vocab, trie, nullptr, cfg);
    const SequenceAdjust filter = [&](std::span<const TokenId> s) -> std::optional<double> {
      const Seq seq(s.begin(), s.end());
      if (!oracle::lexicon_valid(seq, vocab, words)) return std::nullopt;
      return cfg.word_bonus * static_cast<double>(oracle::spelled_words(seq, vocab).size());
    };
    const auto exhaustive = exhaustive_decode(e, frames, filter, vocab.blank_id());
    c.expect(beam.tokens == exhaustive.tokens, "beam != exhaustive for seed " + std::to_string(seed));
    c.expect(std::abs(beam.score - exhaustive.score) <= 1e-9, "score mismatch for seed " + std::to_string(seed));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 60.0, "suite took " + std::to_string(secs) + " s");
  std::ostringstream s;
  s << "240 seeds, " << compared_scores << " scores vs path enumeration, " << std::fixed << std::setprecision(1)
    << secs << " s";
  return c.outcome(s.str());
}

Outcome ctc_normalization() {
  Check c;
  double worst = 0.0;
  std::mt19937_64 rng(77);
  for (std::size_t frames = 1; frames <= 6; ++frames) {
    for (std::size_t v = 2; v <= 4; ++v) {
      for (int rep = 0; rep < 10; ++rep) {
        const auto e = oracle::unit_mass_emissions(frames, v, rng);
        double total = 0.0;
        for (const auto& [seq, p] : oracle::output_distribution(e)) total += std::exp(ctc_score(e, seq));
        worst = std::max(worst, std::abs(total - 1.0));
        c.expect(std::abs(total - 1.0) <= 1e-8, "T=" + std::to_string(frames) + " V=" + std::to_string(v));
      }
    }
  }
  std::ostringstream s;
  s << "180 matrices, max |sum-1| = " << std::scientific << std::setprecision(2) << worst;
  return c.outcome(s.str());
}

Outcome mkn_correctness() {
  Check c;
  auto sent = [](std::initializer_list<const char*> xs) {
    std::vector<lm::Sentence> out;
    for (const char* x : xs) out.push_back(textio::split_fields(x));
    return out;
  };
  auto prob = [](const lm::NGramModel& m, std::vector<std::string> h, const std::string& w) {
    return std::pow(10.0, m.score(h, w));
  };
  lm::MknOptions fb;
  fb.degenerate_fallback = true;
  // Closed-form values of the toy bigram model on {"a b", "b"} with D = 0.5.
  const auto toy = lm::train(sent({"a b", "b"}), 2, fb);
  const std::vector<std::tuple<std::vector<std::string>, std::string, double>> hand{
      {{}, "a", 0.21875},           {{}, "b", 0.46875},           {{}, "</s>", 0.21875},
      {{}, "<unk>", 0.09375},       {{"<s>"}, "a", 0.359375},     {{"<s>"}, "b", 0.484375},
      {{"<s>"}, "</s>", 0.109375},  {{"a"}, "b", 0.734375},       {{"a"}, "a", 0.109375},
      {{"b"}, "</s>", 0.8046875},   {{"b"}, "a", 0.0546875},
  };
  for (const auto& [h, w, want] : hand) c.expect(std::abs(prob(toy, h, w) - want) <= 1e-10, "toy p(" + w + ")");
  const auto one = lm::train(sent({"a"}), 1, fb);
  c.expect(std::abs(prob(one, {}, "a") - (0.25 + 0.5 / 3)) <= 1e-10, "one-word corpus");
  const auto d = lm::mkn_discounts({0, 5, 3, 2, 1});
  c.expect(d && std::abs(d->d[1] - 5.0 / 11) <= 1e-12 && std::abs(d->d[2] - 12.0 / 11) <= 1e-12 &&
               std::abs(d->d[3] - 23.0 / 11) <= 1e-12,
           "discount closed form");

  double worst_norm = 0.0, worst_arpa = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto corpus = fixtures::mkn_corpus(seed, 300);
    const auto m = lm::train(corpus, 3);
    const oracle::MknOracle ref(corpus, 3);
    std::vector<std::string> hist(ref.vocab().begin(), ref.vocab().end());
    hist.resize(std::min<std::size_t>(hist.size(), 10));
    for (const auto& w : ref.vocab()) {
      for (const auto& h1 : hist) {
        c.expect(std::abs(prob(m, {h1}, w) - ref.prob({h1}, w)) <= 1e-10, "bigram vs recursive definition");
        for (const auto& h2 : hist) {
          c.expect(std::abs(prob(m, {h1, h2}, w) - ref.prob({h1, h2}, w)) <= 1e-10,
                   "trigram vs recursive definition");
        }
      }
    }
    for (int order = 1; order <= 3; ++order) {
      const auto mo = lm::train(corpus, order, fb);
      std::vector<std::vector<std::string>> contexts{{}};
      for (int n = 1; n < order; ++n)
        for (const auto& [g, e] : mo.sorted_entries(n))
          if (g.back() != lm::kEos) contexts.push_back(g);
      for (const auto& ctx : contexts) {
        double sum = 0.0;
        for (const auto& w : mo.words())
          if (w != lm::kBos) sum += prob(mo, ctx, w);
        worst_norm = std::max(worst_norm, std::abs(sum - 1.0));
        c.expect(std::abs(sum - 1.0) <= 1e-6, "context does not normalize");
      }
    }
    std::stringstream arpa;
    lm::write_arpa(m, arpa);
    const auto back = lm::read_arpa(arpa);
    std::mt19937_64 rng(seed);
    auto words = m.words();
    words.push_back("oov");
    for (int q = 0; q < 100; ++q) {
      std::vector<std::string> ctx;
      for (std::size_t i = 0, n = rng() % 3; i < n; ++i) ctx.push_back(words[rng() % words.size()]);
      std::string w = words[rng() % words.size()];
      if (w == lm::kBos) w = lm::kEos;
      const double a = m.score(ctx, w), b = back.score(ctx, w);
      worst_arpa = std::max(worst_arpa, std::abs(a - b));
      c.expect(std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(a)), "ARPA round trip changed a score");
    }
  }
  std::ostringstream s;
  s << "hand values, recursive-definition oracle, max |norm-1| = " << std::scientific << std::setprecision(2)
    << worst_norm << ", max ARPA drift = " << worst_arpa;
  return c.outcome(s.str());
}

Outcome metric_oracles() {
  Check c;
  std::mt19937_64 rng(31);
  for (int i = 0; i < 3000; ++i) {
    std::vector<int> ref(rng() % 7), hyp(rng() % 7);
    for (auto& x : ref) x = static_cast<int>(rng() % 3);
    for (auto& x : hyp) x = static_cast<int>(rng() % 3);
    const auto got = edit_distance(ref, hyp);
    const auto want = oracle::best_alignment(ref, hyp, std::equal_to<>{});
    c.expect(got.errors() == want.cost && got.substitutions == want.subs && got.insertions == want.ins,
             "edit_distance disagrees with alignment enumeration");
  }

  // Word scripts over distinct words: substitutions with fresh words plus
  // either deletions or fresh insertions.
  std::vector<std::vector<std::string>> refs, hyps;
  std::uint64_t errors = 0, length = 0;
  int fresh = 0;
  for (int u = 0; u < 300; ++u) {
    std::vector<std::string> r, h;
    const bool inserting = rng() % 2;
    for (std::size_t k = 0, n = 1 + rng() % 12; k < n; ++k) {
      const std::string w = "w" + std::to_string(fresh++);
      r.push_back(w);
      const auto op = rng() % 10;
      if (op == 0) {
        h.push_back("x" + std::to_string(fresh++));
        ++errors;
      } else if (op == 1 && !inserting) {
        ++errors;
      } else {
        h.push_back(w);
      }
      if (inserting && op == 2) {
        h.push_back("y" + std::to_string(fresh++));
        ++errors;
      }
    }
    length += r.size();
    refs.push_back(r);
    hyps.push_back(h);
  }
  const double want_wer = 100.0 * static_cast<double>(errors) / static_cast<double>(length);
  c.expect(std::abs(*wer(refs, hyps) - want_wer) < 1e-12, "WER differs from the script count");

  // Level scripts: Unassigned substitutions plus deletions or Unassigned
  // insertions; none of these can be matched, so the count is exact.
  std::vector<std::vector<LevelHyp>> lrefs, lhyps;
  errors = length = 0;
  for (int u = 0; u < 300; ++u) {
    std::vector<LevelHyp> r, h;
    const bool inserting = rng() % 2;
    for (std::size_t k = 0, n = 1 + rng() % 8; k < n; ++k) {
      const auto l = static_cast<ProminenceLevel>(rng() % 3);
      r.push_back(l);
      const auto op = rng() % 8;
      if (op == 0) {
        h.emplace_back();
        ++errors;
      } else if (op == 1 && !inserting) {
        ++errors;
      } else {
        h.push_back(l);
      }
      if (inserting && op == 2) {
        h.emplace_back();
        ++errors;
      }
    }
    length += r.size();
    lrefs.push_back(r);
    lhyps.push_back(h);
  }
  const double want_per = 100.0 * static_cast<double>(errors) / static_cast<double>(length);
  c.expect(std::abs(*per(lrefs, lhyps) - want_per) < 1e-12, "PER differs from the script count");
  c.expect(per({{ProminenceLevel::PL0, ProminenceLevel::PL2}}, {{std::nullopt, ProminenceLevel::PL2}}) == 50.0,
           "Unassigned PER example");

  // Planted confusions, directly and through a detector run.
  const double keep = 0.85;
  std::vector<std::vector<LevelHyp>> prefs, phyps;
  for (int u = 0; u < 800; ++u) {
    prefs.emplace_back();
    phyps.emplace_back();
    for (int k = 0; k < 4; ++k) {
      const auto l = static_cast<ProminenceLevel>(rng() % 3);
      prefs.back().push_back(l);
      if (std::uniform_real_distribution<>(0, 1)(rng) < keep) {
        phyps.back().push_back(l);
      } else {
        const int other = (level_index(l) + 1 + static_cast<int>(rng() % 3)) % 4;
        phyps.back().push_back(other == 3 ? LevelHyp() : LevelHyp(static_cast<ProminenceLevel>(other)));
      }
    }
  }
  const auto acc = aligned_accuracy(prefs, phyps);
  auto within = [&](double got, double p, double n) { return std::abs(got - 100 * p) <= 300 * std::sqrt(p * (1 - p) / n); };
  c.expect(within(*acc.accuracy, keep, static_cast<double>(acc.confusion.total())), "planted accuracy");
  for (int l = 0; l < 3; ++l) {
    c.expect(within(*acc.recall[l], keep, static_cast<double>(acc.confusion.row_total(l))), "planted recall");
  }
  synth::CorpusOptions copt;
  copt.conversations = 30;
  copt.utterances_per_conversation = 20;
  copt.include_pl1 = false;
  synth::EmissionOptions eopt;
  eopt.level_flip_rate = 0.1;
  fixtures::SynthExperiment x(TaggingMode::Det02, copt, eopt);
  const auto det = run_detector_eval(x.corpus, x.cfg);
  const double n = *det.crossval->metrics.at("gated_words");
  c.expect(within(*det.crossval->metrics.at("Accuracy"), 0.9, n), "planted detector flips");
  return c.outcome("3000 alignment enumerations, scripted WER/PER, planted rates within 3 sigma");
}

Outcome end_to_end(const std::string& cli) {
  Check c;
  oracle::TempDir dir;
  const std::string data = (dir / "data").string();
  c.expect(run(quote(cli) + " gen-synth --seed 11 --noise 0 --out " + quote(data)) == 0, "gen-synth failed");
  const std::vector<std::string> modes{"Det02", "Det012", "Tag0", "Tag2", "Tag02", "Tag012", "Baseline"};
  for (const auto& mode : modes) {
    const std::string base = quote(cli) + " crossval --seed 5 --k 10 --corpus " + quote(data + "/corpus.jsonl") +
                             " --emissions " + quote(data + "/emissions/" + mode) + " --mode " + mode;
    const auto a = dir / (mode + "-a.json"), b = dir / (mode + "-b.json");
    c.expect(run(base + " --json " + quote(a.string())) == 0, mode + " crossval failed");
    c.expect(run(base + " --threads 3 --json " + quote(b.string())) == 0, mode + " crossval failed");
    const std::string ja = slurp(a);
    c.expect(!ja.empty() && ja == slurp(b), mode + " reports differ between runs");
    if (ja.empty()) continue;
    const auto j = nlohmann::json::parse(ja);
    // Tag0 and Tag2 score prominence only on utterances whose every word
    // carries the tagged level, so a fold may hold none of them.
    const bool sparse_levels = mode == "Tag0" || mode == "Tag2";
    auto check_folds = [&](const nlohmann::json& report, bool words, bool levels) {
      c.expect(report["folds"].size() == 10, mode + " does not have 10 folds");
      for (const auto& f : report["folds"]) {
        const auto& m = f["metrics"];
        if (words) c.expect(m["WER"] == 0.0, mode + " WER not 0");
        if (levels && !(sparse_levels && m["PER"].is_null() && m["%Aligned"].is_null())) {
          c.expect(m["PER"] == 0.0, mode + " PER not 0");
          c.expect(m["%Aligned"] == 100.0, mode + " %Aligned not 100");
        }
      }
    };
    if (j["task"] == "detector") {
      check_folds(j["reports"][0], false, true);
    } else {
      const bool tagged = mode != "Baseline";
      check_folds(j["crossval"]["lexfree"], true, tagged);
      check_folds(j["crossval"]["lex"], true, false);
      check_folds(j["crossval"]["lm"], true, false);
    }
  }
  return c.outcome("7 modes, byte-identical reports, all folds perfect");
}

Outcome degenerate_inputs() {
  Check c;
  // Empty utterances throughout the pipeline.
  synth::CorpusOptions copt;
  copt.conversations = 10;
  copt.utterances_per_conversation = 6;
  copt.min_words = 0;
  copt.max_words = 2;
  copt.include_pl1 = false;
  fixtures::SynthExperiment det(TaggingMode::Det02, copt, {}, 5);
  const auto dr = run_detector_eval(det.corpus, det.cfg);
  c.expect(dr.crossval && dr.crossval->metrics.at("PER") == 0.0, "detector run with empty utterances");
  fixtures::SynthExperiment asr(TaggingMode::Tag02, copt, {}, 5);
  const auto ar = run_asr_eval(asr.corpus, asr.cfg);
  c.expect(ar.crossval && ar.crossval->lm && ar.crossval->lm->metrics.at("WER") == 0.0,
           "ASR run with empty utterances");

  // A report of empty utterances only has undefined rates.
  UtteranceRecord empty;
  empty.id = "e";
  empty.word_edits = EditCounts{};
  empty.ref_levels = std::vector<LevelHyp>{};
  empty.hyp_levels = std::vector<LevelHyp>{};
  const auto er = make_report("empty", {empty});
  const auto ej = to_json(er);
  c.expect(ej["metrics"]["WER"].is_null() && ej["metrics"]["PER"].is_null() && ej["metrics"]["Accuracy"].is_null(),
           "empty report lacks null markers");
  c.expect(er.metrics.at("%Aligned") == 100.0, "empty utterances are vacuously aligned");
  c.expect(render_table({{"PDET02", "empty", &er}}).find("n/a") != std::string::npos, "table lacks n/a");

  // All-blank emissions.
  const TokenSet vocab = char_vocab(5);
  std::vector<float> blank_rows;
  for (int t = 0; t < 6; ++t) {
    blank_rows.push_back(0.0f);
    for (int v = 1; v < 5; ++v) blank_rows.push_back(-INFINITY);
  }
  const EmissionMatrix blanks(6, 5, blank_rows);
  c.expect(greedy_decode(blanks).tokens.empty(), "greedy on blanks");
  Lexicon lex;
  lex.add("ab");
  const auto bh = beam_decode(blanks, vocab, LexiconTrie(lex), nullptr, DecodeConfig{});
  c.expect(bh.words.empty() && bh.score == 0.0, "beam on blanks");
  c.expect(extract_sequence(vocab.decode(greedy_decode(blanks).tokens)).empty(), "prominence on blanks");

  // Zero-gated fold.
  for (const auto& u : det.corpus) {
    if (det.cfg.plan.fold_of(u.id) != 0) continue;
    const std::size_t v = det.data.vocab.size();
    std::vector<float> values;
    for (int t = 0; t < 3; ++t) {
      values.push_back(0.0f);
      for (std::size_t k = 1; k < v; ++k) values.push_back(-INFINITY);
    }
    write_emissions(EmissionMatrix(3, v, values), det.data.vocab, emission_path(det.cfg.emissions_dir, u.id));
  }
  const auto zr = run_detector_eval(det.corpus, det.cfg);
  const auto zj = to_json(zr, det.cfg);
  const auto& f0 = zj["reports"][0]["folds"][0]["metrics"];
  c.expect(f0["gated_words"] == 0.0 && f0["Accuracy"].is_null() && f0["Recall_PL2"].is_null(),
           "zero-gated fold lacks null markers");

  // Single-word lexicon and a one-word LM.
  Lexicon single;
  single.add(asr.corpus.utterances().front().words().empty() ? "a" : asr.corpus.utterances().front().words()[0]);
  asr.cfg.lexicon = single;
  const auto sr = run_asr_eval(asr.corpus, asr.cfg);
  c.expect(sr.crossval && sr.crossval->lex.metrics.at("WER").has_value(), "single-word lexicon run");
  lm::MknOptions fb;
  fb.degenerate_fallback = true;
  const auto tiny = lm::train({{"a"}}, 3, fb);
  c.expect(std::isfinite(tiny.sentence_log10({"a"})), "one-word LM");
  bool threw = false;
  try {
    lm::train({{"a"}}, 3);
  } catch (const DegenerateCountsError&) {
    threw = true;
  }
  c.expect(threw, "degenerate counts not reported");
  return c.outcome("empty utterances, all-blank emissions, zero-gated fold, single-word lexicon");
}

}  // namespace
}  // namespace promdec

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <promdec binary>\n";
    return 1;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<promdec::Outcome()>>> criteria{
      {"reference fidelity", promdec::reference_fidelity},
      {"majority vote", promdec::majority_vote},
      {"CTC oracle equivalence", promdec::ctc_oracle_equivalence},
      {"CTC normalization", promdec::ctc_normalization},
      {"modified Kneser-Ney", promdec::mkn_correctness},
      {"metric oracles", promdec::metric_oracles},
      {"end-to-end determinism", [&] { return promdec::end_to_end(cli); }},
      {"degenerate inputs", promdec::degenerate_inputs},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    promdec::Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
