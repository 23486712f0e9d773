// promdec/emissions.hpp

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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "promdec/error.hpp"
#include "promdec/logmath.hpp"
#include "promdec/textio.hpp"
#include "promdec/vocab.hpp"

namespace promdec {

/// Row normalization tolerance: |logsumexp(row)| must not exceed this.
inline constexpr double kRowTolerance = 1e-4;

/// T x V natural-log probabilities, row-major, one row per frame.
class EmissionMatrix {
 public:
  EmissionMatrix(std::size_t frames, std::size_t vocab, std::vector<float> values)
      : frames_(frames), vocab_(vocab), values_(std::move(values)) {
    if (frames_ == 0) throw FormatError("emission matrix has no frames");
    if (vocab_ == 0) throw FormatError("emission matrix has an empty vocabulary");
    if (values_.size() != frames_ * vocab_) {
      throw FormatError("emission matrix holds " + std::to_string(values_.size()) +
                        " values, expected " + std::to_string(frames_ * vocab_));
    }
    validate();
  }

  /// Builds a matrix from probabilities; each row is renormalized first.
  static EmissionMatrix from_probabilities(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw FormatError("emission matrix has no frames");
    const std::size_t v = rows.front().size();
    std::vector<float> values;
    values.reserve(rows.size() * v);
    for (const auto& r : rows) {
      if (r.size() != v) throw FormatError("ragged probability rows");
      double z = 0.0;
      for (double p : r) z += p;
      for (double p : r) values.push_back(static_cast<float>(std::log(p / z)));
    }
    return EmissionMatrix(rows.size(), v, std::move(values));
  }

  std::size_t frames() const { return frames_; }
  std::size_t vocab_size() const { return vocab_; }
  float at(std::size_t t, std::size_t v) const { return values_[t * vocab_ + v]; }
  std::span<const float> row(std::size_t t) const {
    return std::span<const float>(values_).subspan(t * vocab_, vocab_);
  }
  const std::vector<float>& values() const { return values_; }

  friend bool operator==(const EmissionMatrix&, const EmissionMatrix&) = default;

 private:
  void validate() const {
    for (std::size_t t = 0; t < frames_; ++t) {
      for (float x : row(t)) {
        if (std::isnan(x) || x == std::numeric_limits<float>::infinity()) {
          throw FormatError("row " + std::to_string(t) + ": NaN or +Inf log-probability");
        }
      }
      const double lse = logsumexp(row(t));
      if (!(std::abs(lse) <= kRowTolerance)) {
        throw FormatError("row " + std::to_string(t) + " is not normalized (logsumexp = " +
                          std::to_string(lse) + ")");
      }
    }
  }

  std::size_t frames_;
  std::size_t vocab_;
  std::vector<float> values_;
};

// ---------------------------------------------------------------------------
// PROMEM1: "PROMEM1\0", u32 T, u32 V, T*V float32, all little-endian.

inline constexpr std::array<char, 8> kPromemMagic = {'P', 'R', 'O', 'M', 'E', 'M', '1', '\0'};

namespace detail {

template <typename U>
U to_little(U x) {
  if constexpr (std::endian::native == std::endian::big) {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) r = (r << 8) | ((x >> (8 * i)) & 0xFF);
    return r;
  }
  return x;
}

}  // namespace detail

inline std::filesystem::path vocab_sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".vocab";
  return p;
}

inline void write_emissions(const EmissionMatrix& m, const std::filesystem::path& path) {
  auto out = textio::open_out(path);
  out.write(kPromemMagic.data(), kPromemMagic.size());
  const auto put_u32 = [&](std::uint32_t x) {
    x = detail::to_little(x);
    out.write(reinterpret_cast<const char*>(&x), 4);
  };
  put_u32(static_cast<std::uint32_t>(m.frames()));
  put_u32(static_cast<std::uint32_t>(m.vocab_size()));
  for (float f : m.values()) put_u32(std::bit_cast<std::uint32_t>(f));
  if (!out) throw Error("write failed: " + path.string());
}

inline void write_emissions(const EmissionMatrix& m, const TokenSet& vocab,
                            const std::filesystem::path& path) {
  if (vocab.size() != m.vocab_size()) {
    throw FormatError("vocabulary has " + std::to_string(vocab.size()) + " tokens, matrix has " +
                      std::to_string(m.vocab_size()) + " columns");
  }
  write_emissions(m, path);
  write_vocab(vocab, vocab_sidecar(path));
}

inline EmissionMatrix read_emissions(const std::filesystem::path& path) {
  auto in = textio::open_in(path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kPromemMagic.data(), 8) != 0) {
    throw FormatError(where + "bad magic (not a PROMEM1 file)");
  }
  const auto get_u32 = [&](std::size_t off) {
    std::uint32_t x;
    std::memcpy(&x, bytes.data() + off, 4);
    return detail::to_little(x);
  };
  const std::size_t frames = get_u32(8);
  const std::size_t vocab = get_u32(12);
  const std::size_t expected = 16 + 4 * frames * vocab;
  if (bytes.size() < expected) {
    throw FormatError(where + "truncated payload: " + std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expected));
  }
  if (bytes.size() > expected) throw FormatError(where + "trailing bytes after payload");
  std::vector<float> values(frames * vocab);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32(16 + 4 * i));
  }
  try {
    return EmissionMatrix(frames, vocab, std::move(values));
  } catch (const FormatError& e) {
    throw FormatError(where + e.what());
  }
}

/// Reads a matrix and its .vocab sidecar.
inline std::pair<EmissionMatrix, TokenSet> read_emissions_with_vocab(
    const std::filesystem::path& path) {
  auto m = read_emissions(path);
  auto v = read_vocab(vocab_sidecar(path));
  if (v.size() != m.vocab_size()) {
    throw FormatError(path.string() + ": sidecar lists " + std::to_string(v.size()) +
                      " tokens, matrix has " + std::to_string(m.vocab_size()) + " columns");
  }
  return {std::move(m), std::move(v)};
}

/// Reorders columns from the `from` token order to the `to` order. Both
/// sets must hold the same tokens.
inline EmissionMatrix reindex(const EmissionMatrix& m, const TokenSet& from, const TokenSet& to) {
  if (from == to) return m;
  if (from.size() != to.size() || m.vocab_size() != from.size()) {
    throw FormatError("cannot reindex emissions: vocabularies differ in size");
  }
  std::vector<std::size_t> src(to.size());
  for (TokenId i = 0; i < to.size(); ++i) {
    auto j = from.find(to.token(i));
    if (!j) throw FormatError("cannot reindex emissions: token " + to.token(i).text() + " missing");
    src[i] = *j;
  }
  std::vector<float> values(m.values().size());
  for (std::size_t t = 0; t < m.frames(); ++t) {
    for (std::size_t i = 0; i < to.size(); ++i) values[t * to.size() + i] = m.at(t, src[i]);
  }
  return EmissionMatrix(m.frames(), to.size(), std::move(values));
}

// ---------------------------------------------------------------------------
// Tag marginalization

/// Sums the probability of every tagged variant of a base token. Columns
/// with a single source (Blank, Boundary, characters never tagged) are
/// copied bit-exactly.
inline EmissionMatrix marginalize_tags(const EmissionMatrix& m, const TokenSet& tagged,
                                       const TokenSet& base) {
  if (m.vocab_size() != tagged.size()) {
    throw InputError("emission matrix width does not match the tagged vocabulary");
  }
  std::vector<std::vector<std::size_t>> sources(base.size());
  for (TokenId i = 0; i < tagged.size(); ++i) {
    auto b = base.find(strip_tag(tagged.token(i)));
    if (!b) {
      throw InputError("base vocabulary lacks " + strip_tag(tagged.token(i)).text());
    }
    sources[*b].push_back(i);
  }
  for (TokenId b = 0; b < base.size(); ++b) {
    if (sources[b].empty()) {
      throw InputError("base token " + base.token(b).text() + " has no tagged counterpart");
    }
  }
  std::vector<float> values;
  values.reserve(m.frames() * base.size());
  std::vector<double> buf;
  for (std::size_t t = 0; t < m.frames(); ++t) {
    for (TokenId b = 0; b < base.size(); ++b) {
      const auto& src = sources[b];
      if (src.size() == 1) {
        values.push_back(m.at(t, src[0]));
        continue;
      }
      buf.clear();
      for (auto s : src) buf.push_back(m.at(t, s));
      values.push_back(static_cast<float>(logsumexp(std::span<const double>(buf))));
    }
  }
  return EmissionMatrix(m.frames(), base.size(), std::move(values));
}

// ---------------------------------------------------------------------------
// Synthetic emissions

/// Deterministic uniform draws on top of std::mt19937_64, whose output
/// sequence is fixed by the standard (unlike std::uniform_*_distribution).
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct SynthOptions {
  std::size_t frames_per_token = 3;
  double noise = 0.0;  // per-frame probability that the peak moves to a random token
  std::uint64_t seed = 0;
  double peak = 0.95;
};

/// Emissions whose greedy decode reproduces `reference` at noise 0.
///
/// Each token spans frames_per_token frames: frames_per_token - 1 frames
/// peaked on the token followed by one blank frame. A peaked frame puts
/// `peak` on its token and spreads the rest uniformly. With noise > 0 each
/// frame independently has its peak moved to a uniformly drawn token.
inline EmissionMatrix synth_emissions(const std::vector<TokenId>& reference, std::size_t vocab_size,
                                      const SynthOptions& opt, TokenId blank = 0) {
  if (reference.empty()) throw InputError("synth_emissions: empty reference");
  if (opt.frames_per_token < 2) throw InputError("synth_emissions: frames_per_token must be >= 2");
  if (vocab_size < 2) throw InputError("synth_emissions: vocabulary needs at least two tokens");
  if (!(opt.noise >= 0.0 && opt.noise < 1.0)) throw InputError("synth_emissions: noise must be in [0,1)");
  for (auto id : reference) {
    if (id >= vocab_size) throw InputError("synth_emissions: token id out of range");
  }
  SplitRng rng(opt.seed);
  const std::size_t frames = reference.size() * opt.frames_per_token;
  const float hi = static_cast<float>(std::log(opt.peak));
  const float lo = static_cast<float>(std::log((1.0 - opt.peak) / static_cast<double>(vocab_size - 1)));
  std::vector<float> values(frames * vocab_size, lo);
  std::size_t t = 0;
  for (auto id : reference) {
    for (std::size_t k = 0; k < opt.frames_per_token; ++k, ++t) {
      TokenId target = (k + 1 == opt.frames_per_token) ? blank : id;
      if (opt.noise > 0.0 && rng.bernoulli(opt.noise)) target = static_cast<TokenId>(rng.below(vocab_size));
      values[t * vocab_size + target] = hi;
    }
  }
  return EmissionMatrix(frames, vocab_size, std::move(values));
}

}  // namespace promdec
