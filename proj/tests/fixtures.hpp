// tests/fixtures.hpp

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

#include <optional>
#include <random>
#include <stdexcept>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "promdec/corpus.hpp"
#include "promdec/harness.hpp"
#include "promdec/lm.hpp"
#include "promdec/synth.hpp"

namespace promdec::fixtures {

/// Level as written in test tables: 0, 1, 2 or -1 for "no level".
struct W {
  std::string text;  // space-separated orthographic tokens of one prosodic word
  int level = -1;
};

inline Utterance make_utterance(const std::vector<W>& words, std::string id = "u1",
                                std::string conversation = "001M002F", std::string speaker = "001M") {
  Utterance u;
  u.id = std::move(id);
  u.conversation_id = std::move(conversation);
  u.speaker_id = std::move(speaker);
  for (const auto& w : words) {
    ProsodicWord pw;
    std::istringstream ss(w.text);
    for (std::string t; ss >> t;) pw.tokens.push_back(t);
    if (w.level >= 0) pw.level = collapse_level(w.level);
    u.prosodic_words.push_back(std::move(pw));
  }
  return u;
}

inline std::vector<std::optional<ProminenceLevel>> levels(std::initializer_list<int> xs) {
  std::vector<std::optional<ProminenceLevel>> out;
  for (int x : xs) {
    if (x < 0) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(collapse_level(x));
    }
  }
  return out;
}

/// Sentences over a Zipf-ish vocabulary "w0", "w1", ...
inline std::vector<lm::Sentence> zipf_corpus(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
  std::vector<double> weights;
  for (std::size_t i = 0; i < vocab; ++i) weights.push_back(1.0 / static_cast<double>(i + 1));
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<lm::Sentence> out;
  for (std::size_t i = 0; i < n; ++i) {
    lm::Sentence s(1 + rng() % 6);
    for (auto& w : s) w = "w" + std::to_string(pick(rng));
    out.push_back(std::move(s));
  }
  return out;
}

/// First Zipf corpus from the seeded stream whose trigram counts give
/// defined discounts at every order.
inline std::vector<lm::Sentence> mkn_corpus(std::uint64_t seed, std::size_t n, std::size_t vocab = 80) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto corpus = zipf_corpus(rng, n, vocab);
    const auto c = lm::count_ngrams(corpus);
    bool ok = true;
    for (int k = 1; k <= 3; ++k) ok = ok && lm::mkn_discounts(c.count_of_counts[k]).has_value();
    if (ok) return corpus;
  }
  throw std::runtime_error("no non-degenerate corpus");
}

/// A synthetic corpus with emissions for one mode written to a scratch
/// directory, and a run configuration pointing at them.
struct SynthExperiment {
  oracle::TempDir dir;
  Corpus corpus;
  synth::ModeData data;
  RunConfig cfg;

  SynthExperiment(TaggingMode mode, const synth::CorpusOptions& copt, const synth::EmissionOptions& eopt,
                  std::size_t k = 10, std::set<std::string> holdout = {}, std::uint64_t seed = 7)
      : corpus(synth::make_corpus(copt)), data(synth::make_mode_data(corpus, mode, eopt)) {
    synth::write_mode_data(data, dir.path());
    cfg.mode = mode;
    cfg.emissions_dir = dir.path() / "emissions" / std::string(mode_name(mode));
    cfg.plan = make_folds(corpus, k, seed, holdout);
  }
};

}  // namespace promdec::fixtures
