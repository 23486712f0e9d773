// promdec/synth.hpp

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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "promdec/corpus.hpp"
#include "promdec/emissions.hpp"
#include "promdec/textio.hpp"
#include "promdec/vocab.hpp"

namespace promdec::synth {

struct CorpusOptions {
  std::size_t conversations = 20;
  std::size_t utterances_per_conversation = 12;
  std::size_t min_words = 1;  // prosodic words per utterance
  std::size_t max_words = 5;
  std::size_t lexicon_size = 300;
  bool include_pl1 = true;
  double unannotated_rate = 0.0;  // chance that a prosodic word has no level
  double excluded_rate = 0.0;     // chance that an utterance carries an exclusion flag
  std::uint64_t seed = 1;
};

struct EmissionOptions {
  std::size_t frames_per_token = 3;
  double noise = 0.0;           // see SynthOptions::noise
  double level_flip_rate = 0.0;  // planted prominence errors
  double char_error_rate = 0.0;  // planted character substitutions (Tag/Baseline modes)
  std::uint64_t seed = 1;
};

namespace detail {

// Approximate German letter frequencies (per mille).
inline constexpr std::array<std::pair<char32_t, int>, 30> kLetters = {{
    {U'e', 164}, {U'n', 98}, {U'i', 76}, {U's', 73}, {U'r', 70}, {U'a', 65}, {U't', 62}, {U'd', 51},
    {U'h', 48},  {U'u', 44}, {U'l', 34}, {U'c', 31}, {U'g', 30}, {U'm', 25}, {U'o', 25}, {U'b', 19},
    {U'w', 19},  {U'f', 17}, {U'k', 12}, {U'z', 11}, {U'p', 8},  {U'v', 7},  {U'ß', 3},  {U'ü', 7},
    {U'ä', 5},   {U'ö', 3},  {U'j', 3},  {U'y', 1},  {U'x', 1},  {U'q', 1},
}};

inline char32_t draw_letter(SplitRng& rng) {
  int total = 0;
  for (const auto& [c, w] : kLetters) total += w;
  auto x = static_cast<int>(rng.below(static_cast<std::size_t>(total)));
  for (const auto& [c, w] : kLetters) {
    if (x < w) return c;
    x -= w;
  }
  return U'e';
}

inline std::string pad3(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", n);
  return buf;
}

}  // namespace detail

/// Pseudo-German word list: distinct words of 1-9 letters.
inline std::vector<std::string> make_words(std::size_t count, SplitRng& rng) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  std::size_t attempts = 0;
  while (out.size() < count && attempts++ < count * 100) {
    const std::size_t len = 1 + rng.below(4) + rng.below(5);
    std::u32string w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(detail::draw_letter(rng));
    auto s = unicode::encode(w);
    // Keep the corpus a fixed point of normalize_text.
    if (normalize_text(s) != s || s == "uh") continue;
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

/// Conversations "001M002F", speakers "001M"/"002F", utterances
/// "<conversation>_<speaker>_<nnn>".
inline Corpus make_corpus(const CorpusOptions& opt) {
  SplitRng rng(opt.seed);
  const auto words = make_words(opt.lexicon_size, rng);
  if (words.empty()) throw InputError("synthetic lexicon is empty");
  std::vector<Utterance> utts;
  static constexpr std::array<ExclusionFlag, 5> kFlags = {
      ExclusionFlag::Laughter, ExclusionFlag::Singing, ExclusionFlag::Onomatopoeia,
      ExclusionFlag::Unintelligible, ExclusionFlag::Artefact};
  for (std::size_t c = 0; c < opt.conversations; ++c) {
    const std::string spk_a = detail::pad3(2 * c + 1) + "M";
    const std::string spk_b = detail::pad3(2 * c + 2) + "F";
    const std::string conv = spk_a + spk_b;
    for (std::size_t i = 0; i < opt.utterances_per_conversation; ++i) {
      Utterance u;
      u.conversation_id = conv;
      u.speaker_id = i % 2 == 0 ? spk_a : spk_b;
      u.id = conv + "_" + u.speaker_id + "_" + detail::pad3(i);
      const std::size_t span = opt.max_words >= opt.min_words ? opt.max_words - opt.min_words + 1 : 1;
      const std::size_t n = opt.min_words + rng.below(span);
      for (std::size_t k = 0; k < n; ++k) {
        ProsodicWord pw;
        pw.tokens.push_back(words[rng.below(words.size())]);
        if (rng.bernoulli(0.15)) pw.tokens.push_back(words[rng.below(words.size())]);
        const double x = rng.uniform();
        if (opt.include_pl1) {
          pw.level = x < 0.55 ? ProminenceLevel::PL0 : x < 0.70 ? ProminenceLevel::PL1 : ProminenceLevel::PL2;
        } else {
          pw.level = x < 0.6 ? ProminenceLevel::PL0 : ProminenceLevel::PL2;
        }
        if (opt.unannotated_rate > 0.0 && rng.bernoulli(opt.unannotated_rate)) pw.level.reset();
        u.prosodic_words.push_back(std::move(pw));
      }
      if (opt.excluded_rate > 0.0 && rng.bernoulli(opt.excluded_rate)) {
        u.exclusion_flags.insert(kFlags[rng.below(kFlags.size())]);
      }
      utts.push_back(std::move(u));
    }
  }
  return Corpus(std::move(utts));
}

/// Copy of `utt` whose levels were flipped with probability `rate` to a
/// different level the mode can express.
inline Utterance plant_level_flips(Utterance utt, TaggingMode mode, double rate, SplitRng& rng) {
  if (rate <= 0.0 || mode == TaggingMode::Baseline) return utt;
  const bool three_levels = mode == TaggingMode::Tag012 || mode == TaggingMode::Det012;
  for (auto& pw : utt.prosodic_words) {
    if (!pw.level || !rng.bernoulli(rate)) continue;
    std::vector<ProminenceLevel> others;
    for (auto l : kAllLevels) {
      if (l != *pw.level && (three_levels || l != ProminenceLevel::PL1)) others.push_back(l);
    }
    if (!others.empty()) pw.level = others[rng.below(others.size())];
  }
  return utt;
}

struct ModeData {
  TaggingMode mode;
  TokenSet vocab;
  std::vector<textio::TsvRecord> references;  // clean
  std::vector<textio::TsvRecord> planted;     // what the emissions encode
  std::map<std::string, EmissionMatrix> emissions;
};

/// Emissions for every utterance that the mode can render. Utterances the
/// mode cannot express (PL1 under Det02, unannotated words under Det*) are
/// skipped.
inline ModeData make_mode_data(const Corpus& corpus, TaggingMode mode, const EmissionOptions& opt) {
  SplitRng rng(opt.seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(mode) + 1)));
  ModeData d{mode, TokenSet(), {}, {}, {}};
  std::vector<std::vector<Token>> planted_tokens;
  std::vector<std::string> ids;
  std::set<Token> symbols;
  std::set<char32_t> bases;
  for (const auto& u : corpus) {
    std::string clean;
    try {
      clean = reference_for(u, mode);
    } catch (const ModeError&) {
      continue;
    } catch (const IncompleteAnnotationError&) {
      continue;
    }
    for (const auto& t : parse_tokens(clean, mode)) {
      symbols.insert(t);
      if (t.is_char()) bases.insert(t.base);
    }
    auto noisy = plant_level_flips(u, mode, opt.level_flip_rate, rng);
    auto tokens = parse_tokens(reference_for(noisy, mode), mode);
    d.references.emplace_back(u.id, clean);
    ids.push_back(u.id);
    planted_tokens.push_back(std::move(tokens));
  }
  if (opt.char_error_rate > 0.0 && !bases.empty()) {
    const std::vector<char32_t> pool(bases.begin(), bases.end());
    for (auto& toks : planted_tokens) {
      for (auto& t : toks) {
        if (t.is_char() && pool.size() > 1 && rng.bernoulli(opt.char_error_rate)) {
          char32_t c = t.base;
          while (c == t.base) c = pool[rng.below(pool.size())];
          t.base = c;
        }
      }
    }
  }
  for (const auto& toks : planted_tokens) symbols.insert(toks.begin(), toks.end());
  d.vocab = TokenSet::canonical(symbols);
  SynthOptions so;
  so.frames_per_token = opt.frames_per_token;
  so.noise = opt.noise;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    so.seed = rng.next();
    d.planted.emplace_back(ids[i], render_tokens(planted_tokens[i]));
    const auto ref = d.vocab.encode(planted_tokens[i]);
    if (ref.empty()) {
      // An empty utterance becomes a short run of certain blanks.
      std::vector<float> row(d.vocab.size(), -std::numeric_limits<float>::infinity());
      row[d.vocab.blank_id()] = 0.0f;
      std::vector<float> values;
      for (std::size_t f = 0; f < so.frames_per_token; ++f) values.insert(values.end(), row.begin(), row.end());
      d.emissions.emplace(ids[i], EmissionMatrix(so.frames_per_token, d.vocab.size(), std::move(values)));
      continue;
    }
    d.emissions.emplace(ids[i], synth_emissions(ref, d.vocab.size(), so, d.vocab.blank_id()));
  }
  return d;
}

/// Writes <dir>/emissions/<Mode>/<id>.promem (+ .vocab), <dir>/refs/<Mode>.tsv,
/// <dir>/planted/<Mode>.tsv and <dir>/vocab/<Mode>.txt.
inline void write_mode_data(const ModeData& d, const std::filesystem::path& dir) {
  const std::string name(mode_name(d.mode));
  const auto em = dir / "emissions" / name;
  std::filesystem::create_directories(em);
  std::filesystem::create_directories(dir / "refs");
  std::filesystem::create_directories(dir / "planted");
  std::filesystem::create_directories(dir / "vocab");
  for (const auto& [id, m] : d.emissions) write_emissions(m, d.vocab, em / (id + ".promem"));
  textio::write_tsv(dir / "refs" / (name + ".tsv"), d.references);
  textio::write_tsv(dir / "planted" / (name + ".tsv"), d.planted);
  write_vocab(d.vocab, dir / "vocab" / (name + ".txt"));
}

}  // namespace promdec::synth
