// tests/harness_test.cpp

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

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "promdec/harness.hpp"

namespace promdec {
namespace {

using fixtures::SynthExperiment;

synth::CorpusOptions small_corpus(bool pl1 = true) {
  synth::CorpusOptions o;
  o.conversations = 20;
  o.utterances_per_conversation = 6;
  o.lexicon_size = 120;
  o.include_pl1 = pl1;
  return o;
}

double metric(const EvalReport& r, const std::string& key) {
  const auto& v = r.metrics.at(key);
  EXPECT_TRUE(v.has_value()) << key;
  return v.value_or(NAN);
}

TEST(Folds, ConversationLevelPartition) {
  const Corpus corpus = synth::make_corpus(small_corpus());
  const auto plan = make_folds(corpus, 10, 3);
  std::vector<int> per_fold(10);
  for (const auto& [conv, f] : plan.conversation_fold) ++per_fold[f];
  for (int n : per_fold) EXPECT_EQ(n, 2);
  for (const auto& u : corpus) EXPECT_EQ(plan.fold_of(u.id), plan.conversation_fold.at(u.conversation_id));
  EXPECT_EQ(plan.assignment.size(), corpus.size());

  const auto again = make_folds(corpus, 10, 3);
  EXPECT_EQ(again.assignment, plan.assignment);
  EXPECT_NE(make_folds(corpus, 10, 4).assignment, plan.assignment);
}

TEST(Folds, HoldoutAndErrors) {
  const Corpus corpus = synth::make_corpus(small_corpus());
  const auto plan = make_folds(corpus, 5, 1, {"007M008F"});
  for (const auto& u : corpus) {
    EXPECT_EQ(plan.fold_of(u.id).has_value(), u.conversation_id != "007M008F");
  }
  EXPECT_EQ(plan.conversation_fold.size(), 19u);
  EXPECT_THROW(make_folds(corpus, 1, 1), InputError);
  EXPECT_THROW(make_folds(corpus, 20, 1, {"007M008F"}), InputError);
}

TEST(DetectorEval, NoiseFreeIsPerfect) {
  for (auto mode : {TaggingMode::Det02, TaggingMode::Det012}) {
    SynthExperiment x(mode, small_corpus(mode == TaggingMode::Det012), {}, 10, {"001M002F"});
    const auto r = run_detector_eval(x.corpus, x.cfg);
    ASSERT_TRUE(r.crossval && r.holdout);
    EXPECT_EQ(r.holdout_set, "001M002F");
    for (const auto& f : r.crossval->folds) {
      EXPECT_EQ(f.metrics.at("PER"), 0.0);
      EXPECT_EQ(f.metrics.at("%Aligned"), 100.0);
      EXPECT_EQ(f.metrics.at("Accuracy"), 100.0);
    }
    EXPECT_EQ(r.crossval->fold_stats.at("PER").std, 0.0);
    EXPECT_EQ(metric(*r.holdout, "Accuracy"), 100.0);
    EXPECT_NE(render_table(r, mode).find("001M002F"), std::string::npos);
  }
}

TEST(DetectorEval, SkipsUtterancesTheModeCannotExpress) {
  SynthExperiment x(TaggingMode::Det02, small_corpus(true), {});
  const auto r = run_detector_eval(x.corpus, x.cfg);
  std::size_t pl1 = 0;
  for (const auto& u : x.corpus) {
    for (const auto& pw : u.prosodic_words) {
      if (pw.level == ProminenceLevel::PL1) {
        ++pl1;
        break;
      }
    }
  }
  EXPECT_EQ(r.skipped, pl1);
  EXPECT_EQ(r.crossval->utterances.size() + r.skipped, x.corpus.size());
}

TEST(DetectorEval, RecoversPlantedFlipRate) {
  auto copt = small_corpus(false);
  copt.conversations = 40;
  copt.utterances_per_conversation = 20;
  synth::EmissionOptions eopt;
  eopt.level_flip_rate = 0.10;
  SynthExperiment x(TaggingMode::Det02, copt, eopt);
  const auto r = run_detector_eval(x.corpus, x.cfg);
  const double n = metric(*r.crossval, "gated_words");
  const double sigma = 100.0 * std::sqrt(0.9 * 0.1 / n);
  EXPECT_NEAR(metric(*r.crossval, "Accuracy"), 90.0, 3 * sigma);
  EXPECT_EQ(metric(*r.crossval, "%Aligned"), 100.0);
}

TEST(DetectorEval, ZeroGatedFoldYieldsNulls) {
  SynthExperiment x(TaggingMode::Det02, small_corpus(false), {});
  // Fold 0 hears nothing: every frame is a certain blank.
  const std::size_t v = x.data.vocab.size();
  std::vector<float> row(v, -INFINITY);
  row[0] = 0.0f;
  for (const auto& u : x.corpus) {
    if (x.cfg.plan.fold_of(u.id) != 0) continue;
    std::vector<float> values;
    for (int t = 0; t < 4; ++t) values.insert(values.end(), row.begin(), row.end());
    write_emissions(EmissionMatrix(4, v, values), x.data.vocab, emission_path(x.cfg.emissions_dir, u.id));
  }
  const auto r = run_detector_eval(x.corpus, x.cfg);
  const auto& f0 = r.crossval->folds[0].metrics;
  EXPECT_EQ(f0.at("%Aligned"), 0.0);
  EXPECT_EQ(f0.at("PER"), 100.0);
  EXPECT_FALSE(f0.at("Accuracy"));
  EXPECT_FALSE(f0.at("Recall_PL0"));
  EXPECT_EQ(r.crossval->fold_stats.at("Accuracy").n, 9u);
  const auto j = to_json(r, x.cfg);
  EXPECT_TRUE(j["reports"][0]["folds"][0]["metrics"]["Accuracy"].is_null());
  EXPECT_NE(render_table(r, TaggingMode::Det02).find("100.00±0.00"), std::string::npos);
}

TEST(DetectorEval, MissingEmissionsNameTheUtterance) {
  SynthExperiment x(TaggingMode::Det02, small_corpus(false), {});
  const std::string victim = x.corpus.utterances()[5].id;
  std::filesystem::remove(emission_path(x.cfg.emissions_dir, victim));
  try {
    run_detector_eval(x.corpus, x.cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(victim), std::string::npos);
  }
}

TEST(DetectorEval, ThreadCountDoesNotChangeResults) {
  SynthExperiment x(TaggingMode::Det012, small_corpus(), {3, 0.0, 0.2, 0.0, 3});
  const auto one = to_json(run_detector_eval(x.corpus, x.cfg), x.cfg);
  x.cfg.threads = 4;
  const auto four = to_json(run_detector_eval(x.corpus, x.cfg), x.cfg);
  EXPECT_EQ(one.dump(), four.dump());
}

TEST(AsrEval, NoiseFreeIsPerfect) {
  for (auto mode : {TaggingMode::Tag02, TaggingMode::Tag012, TaggingMode::Baseline}) {
    SynthExperiment x(mode, small_corpus(), {}, 10, {"003M004F"});
    const auto r = run_asr_eval(x.corpus, x.cfg);
    ASSERT_TRUE(r.crossval && r.holdout && r.crossval->lm);
    for (const auto* rep : {&r.crossval->lexfree, &r.crossval->lex, &*r.crossval->lm}) {
      for (const auto& f : rep->folds) EXPECT_EQ(f.metrics.at("WER"), 0.0) << mode_name(mode);
    }
    if (mode != TaggingMode::Baseline) {
      for (const auto& f : r.crossval->lexfree.folds) {
        EXPECT_EQ(f.metrics.at("PER"), 0.0);
        EXPECT_EQ(f.metrics.at("%Aligned"), 100.0);
      }
    } else {
      EXPECT_EQ(r.crossval->lexfree.metrics.count("PER"), 0u);
    }
    EXPECT_EQ(metric(r.holdout->lm.value(), "WER"), 0.0);
  }
}

TEST(AsrEval, LexiconRepairsCharacterErrors) {
  synth::EmissionOptions eopt;
  eopt.char_error_rate = 0.08;
  SynthExperiment x(TaggingMode::Tag02, small_corpus(), eopt);
  x.cfg.use_lm = false;
  const auto r = run_asr_eval(x.corpus, x.cfg);
  const double lexfree = metric(r.crossval->lexfree, "WER"), lex = metric(r.crossval->lex, "WER");
  EXPECT_GT(lexfree, 0.0);
  EXPECT_LE(lex, lexfree);
  EXPECT_FALSE(r.crossval->lm);
}

TEST(AsrEval, ExcludedUtterancesAreDropped) {
  auto copt = small_corpus();
  copt.excluded_rate = 0.2;
  SynthExperiment x(TaggingMode::Tag02, copt, {});
  const auto r = run_asr_eval(x.corpus, x.cfg);
  EXPECT_GT(r.excluded, 0u);
  EXPECT_EQ(r.crossval->lexfree.utterances.size() + r.excluded, x.corpus.size());
}

TEST(Degenerate, EmptyUtterancesAndSingleWordLexicon) {
  auto copt = small_corpus(false);
  copt.min_words = 0;
  copt.max_words = 2;
  SynthExperiment det(TaggingMode::Det02, copt, {});
  std::size_t empties = 0;
  for (const auto& u : det.corpus) empties += u.prosodic_words.empty();
  ASSERT_GT(empties, 0u);
  const auto d = run_detector_eval(det.corpus, det.cfg);
  EXPECT_EQ(metric(*d.crossval, "PER"), 0.0);

  SynthExperiment asr(TaggingMode::Tag02, copt, {});
  Lexicon one;
  one.add(asr.corpus.utterances()[0].words().empty() ? "a" : asr.corpus.utterances()[0].words()[0]);
  asr.cfg.lexicon = one;
  const auto r = run_asr_eval(asr.corpus, asr.cfg);
  ASSERT_TRUE(r.crossval);
  EXPECT_GT(metric(r.crossval->lex, "WER"), 0.0);
  EXPECT_EQ(metric(r.crossval->lexfree, "WER"), 0.0);
  const auto j = to_json(r, asr.cfg).dump();
  EXPECT_NE(j.find("\"WER\""), std::string::npos);
}

}  // namespace
}  // namespace promdec
