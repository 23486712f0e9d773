// tests/prominence_test.cpp

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

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "promdec/prominence.hpp"

namespace promdec {
namespace {

constexpr auto PL0 = ProminenceLevel::PL0;
constexpr auto PL1 = ProminenceLevel::PL1;
constexpr auto PL2 = ProminenceLevel::PL2;

WordSegment seg(const std::string& digits) {
  WordSegment s;
  s.tag_string = digits;
  for (char c : digits) s.tokens.push_back(Token::character(U'a', level_from_digit(static_cast<char32_t>(c))));
  return s;
}

// Counts every digit, then accepts the winner only if no other digit
// reaches its count.
LevelHyp vote_oracle(const std::string& digits) {
  std::map<char, int> count;
  for (char c : digits) ++count[c];
  char winner = 0;
  int top = 0, holders = 0;
  for (const auto& [c, n] : count) {
    if (n > top) {
      top = n;
      winner = c;
      holders = 1;
    } else if (n == top) {
      ++holders;
    }
  }
  if (holders != 1) return std::nullopt;
  return level_from_digit(static_cast<char32_t>(winner));
}

TEST(SegmentWords, Examples) {
  const auto die = parse_tokens("|d0 i0 e0 |", TaggingMode::Tag02);
  auto s = segment_words(die);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].tag_string, "000");
  EXPECT_EQ(s[0].tokens.size(), 3u);
  EXPECT_TRUE(segment_words(parse_tokens("| |", TaggingMode::Tag02)).empty());
  s = segment_words(parse_tokens("d | a2", TaggingMode::Tag02));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].tag_string, "");
  EXPECT_EQ(s[1].tag_string, "2");
  const std::vector<Token> with_blank{Token::blank()};
  EXPECT_THROW(segment_words(with_blank), InputError);
}

TEST(ExtractLevel, Examples) {
  EXPECT_EQ(extract_level(seg("000")), LevelHyp(PL0));
  EXPECT_EQ(extract_level(seg("01")), LevelHyp());
  EXPECT_EQ(extract_level(seg("001")), LevelHyp(PL0));
  EXPECT_EQ(extract_level(seg("")), LevelHyp());
  EXPECT_EQ(extract_level(seg("012")), LevelHyp());
  EXPECT_EQ(extract_level(seg("0122")), LevelHyp(PL2));
  EXPECT_EQ(extract_level(seg("1")), LevelHyp(PL1));
}

TEST(ExtractLevel, MatchesVoteOracle) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    std::string digits(rng() % 9, '0');
    for (auto& c : digits) c = static_cast<char>('0' + rng() % 3);
    ASSERT_EQ(extract_level(seg(digits)), vote_oracle(digits)) << '"' << digits << '"';
  }
}

TEST(ExtractLevel, PermutationInvariantAndUnanimous) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    std::string digits(1 + rng() % 7, '0');
    for (auto& c : digits) c = static_cast<char>('0' + rng() % 3);
    const auto want = extract_level(seg(digits));
    std::shuffle(digits.begin(), digits.end(), rng);
    EXPECT_EQ(extract_level(seg(digits)), want);
    const char d = digits[0];
    EXPECT_EQ(extract_level(seg(std::string(digits.size(), d))), level_from_digit(static_cast<char32_t>(d)));
  }
}

TEST(ExtractSequence, Examples) {
  EXPECT_EQ(extract_sequence("|d0 i0 e0 |a2 l2 l2 e2 |", TaggingMode::Tag02),
            (std::vector<LevelHyp>{PL0, PL2}));
  EXPECT_EQ(extract_sequence("|d0 i1 e |", TaggingMode::Tag012), (std::vector<LevelHyp>{std::nullopt}));
  EXPECT_EQ(extract_sequence("|d i e |w a r e n |", TaggingMode::Baseline),
            (std::vector<LevelHyp>{std::nullopt, std::nullopt}));
  EXPECT_TRUE(extract_sequence("", TaggingMode::Tag02).empty());
}

TEST(ExtractSequence, OneLevelPerSegment) {
  const TokenSet v = build_vocab({"|a0 b0 a2 b2 a1 b1 |"}, TaggingMode::Tag012);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) {
    std::vector<Token> h;
    for (std::size_t k = 0, n = rng() % 12; k < n; ++k) h.push_back(v.token(1 + rng() % (v.size() - 1)));
    EXPECT_EQ(extract_sequence(h).size(), segment_words(h).size());
  }
}

TEST(LevelsFile, RoundTripAndErrors) {
  oracle::TempDir dir;
  const std::vector<LevelRecord> rows{{"u1", {PL0, std::nullopt, PL2}}, {"u2", {}}};
  write_levels(rows, dir / "p.tsv");
  const auto back = read_levels(dir / "p.tsv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].levels, rows[0].levels);
  EXPECT_TRUE(back[1].levels.empty());
  EXPECT_EQ(render_levels(rows[0].levels), "0 ? 2");
  {
    std::ofstream(dir / "bad.tsv") << "u1\t0 2\nu2\t0 x\n";
  }
  try {
    read_levels(dir / "bad.tsv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

}  // namespace
}  // namespace promdec
