// tests/cli_test.cpp

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

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"

namespace {

using promdec::oracle::TempDir;

int run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" PROMDEC_CLI "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("make-refs --corpus x"), 1);
  EXPECT_EQ(run("decode --mode fancy --emissions x --out y"), 1);
  EXPECT_EQ(run("gen-synth --out x --noise 2"), 1);
  EXPECT_EQ(run("gen-synth --out x", "PROMDEC_SEED=abc"), 1);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("crossval --help"), 0);
}

TEST(Cli, DataErrorsExitTwo) {
  TempDir dir;
  EXPECT_EQ(run("normalize --in " + q(dir / "missing.jsonl") + " --out " + q(dir / "o.jsonl")), 2);
  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"u1\"\n";
  EXPECT_EQ(run("normalize --in " + q(dir / "bad.jsonl") + " --out " + q(dir / "o.jsonl")), 2);
  std::ofstream(dir / "bad.cfg") << "this line has no equals sign\n";
  EXPECT_EQ(run("gen-synth --config " + q(dir / "bad.cfg") + " --out " + q(dir / "g")), 2);
  ASSERT_EQ(run("gen-synth --conversations 4 --utterances 2 --modes Det02 --out " + q(dir / "g")), 0);
  EXPECT_EQ(run("crossval --k 10 --corpus " + q(dir / "g/corpus.jsonl") + " --emissions " +
                q(dir / "g/emissions/Det02") + " --mode Det02 --json " + q(dir / "r.json")),
            2);
  EXPECT_EQ(run("crossval --k 2 --corpus " + q(dir / "g/corpus.jsonl") + " --emissions " +
                q(dir / "g/emissions/Tag02") + " --mode Tag02 --json " + q(dir / "r.json")),
            2);
}

TEST(Cli, SeedPrecedence) {
  TempDir dir;
  const std::string small = " --conversations 3 --utterances 2 --modes Det02 --out ";
  ASSERT_EQ(run("gen-synth --seed 5" + small + q(dir / "a")), 0);
  ASSERT_EQ(run("gen-synth" + small + q(dir / "b"), "PROMDEC_SEED=5"), 0);
  ASSERT_EQ(run("gen-synth" + small + q(dir / "c"), "PROMDEC_SEED=6"), 0);
  ASSERT_EQ(run("gen-synth --seed 5" + small + q(dir / "d"), "PROMDEC_SEED=6"), 0);
  const std::string a = slurp(dir / "a/corpus.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b/corpus.jsonl"));
  EXPECT_NE(a, slurp(dir / "c/corpus.jsonl"));
  EXPECT_EQ(a, slurp(dir / "d/corpus.jsonl"));
  std::ofstream(dir / "seed.cfg") << "# seed from a file\nseed = 5\nconversations=3\n";
  ASSERT_EQ(run("gen-synth --config " + q(dir / "seed.cfg") + " --utterances 2 --modes Det02 --out " + q(dir / "e"),
                "PROMDEC_SEED=6"),
            0);
  EXPECT_EQ(a, slurp(dir / "e/corpus.jsonl"));
}

TEST(Cli, ConfigFileAndOverrides) {
  TempDir dir;
  std::ofstream(dir / "g.cfg") << "conversations=4\nutterances=3\nmodes=Det02\n";
  ASSERT_EQ(run("gen-synth --config " + q(dir / "g.cfg") + " --utterances 2 --out " + q(dir / "g")), 0);
  std::ifstream in(dir / "g/corpus.jsonl");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) lines += !l.empty();
  EXPECT_EQ(lines, 8u);
  EXPECT_TRUE(std::filesystem::exists(dir / "g/emissions/Det02"));
  EXPECT_FALSE(std::filesystem::exists(dir / "g/emissions/Tag02"));
}

TEST(Cli, PipelineOnNoiseFreeData) {
  TempDir dir;
  const auto g = dir / "g";
  ASSERT_EQ(run("gen-synth --seed 2 --conversations 4 --utterances 4 --modes Det02,Tag02 --out " + q(g)), 0);
  ASSERT_EQ(run("make-refs --corpus " + q(g / "corpus.jsonl") + " --mode Det02 --out " + q(dir / "det.tsv")), 0);
  ASSERT_EQ(run("build-vocab --refs " + q(dir / "det.tsv") + " --mode Det02 --out " + q(dir / "det.vocab")), 0);
  ASSERT_EQ(run("decode --mode lexfree --emissions " + q(g / "emissions/Det02") + " --vocab " +
                q(dir / "det.vocab") + " --out " + q(dir / "det.hyp")),
            0);
  ASSERT_EQ(run("extract-prom --hyp " + q(dir / "det.hyp") + " --mode Det02 --out " + q(dir / "det.prom")), 0);
  EXPECT_NE(slurp(dir / "det.prom").find('\t'), std::string::npos);
  ASSERT_EQ(run("score --task detector --mode Det02 --ref " + q(dir / "det.tsv") + " --hyp " + q(dir / "det.hyp") +
                " --json " + q(dir / "det.json")),
            0);
  auto j = nlohmann::json::parse(slurp(dir / "det.json"));
  EXPECT_EQ(j["metrics"]["PER"], 0.0);
  EXPECT_EQ(j["metrics"]["%Aligned"], 100.0);

  ASSERT_EQ(run("make-refs --corpus " + q(g / "corpus.jsonl") + " --mode Tag02 --out " + q(dir / "tag.tsv")), 0);
  ASSERT_EQ(run("build-lexicon --corpus " + q(g / "corpus.jsonl") + " --out " + q(dir / "lex.txt")), 0);
  ASSERT_EQ(run("train-lm --corpus " + q(g / "corpus.jsonl") + " --out " + q(dir / "lm.arpa")), 0);
  EXPECT_LE(slurp(dir / "lm.arpa").find("\\data\\"), 1u);
  for (const std::string mode : {"lexfree", "lex", "lm"}) {
    ASSERT_EQ(run("decode --mode " + mode + " --keep-tags true --emissions " + q(g / "emissions/Tag02") +
                  " --lexicon " + q(dir / "lex.txt") + " --lm " + q(dir / "lm.arpa") + " --out " +
                  q(dir / (mode + ".hyp"))),
              0)
        << mode;
    ASSERT_EQ(run("score --task asr --mode Tag02 --ref " + q(dir / "tag.tsv") + " --hyp " + q(dir / (mode + ".hyp")) +
                  " --json " + q(dir / (mode + ".json"))),
              0);
    j = nlohmann::json::parse(slurp(dir / (mode + ".json")));
    EXPECT_EQ(j["metrics"]["WER"], 0.0) << mode;
  }
  EXPECT_EQ(run("decode --mode lex --emissions " + q(g / "emissions/Tag02") + " --out " + q(dir / "x.hyp")), 1);
}

TEST(Cli, CrossvalIsReproducible) {
  TempDir dir;
  const auto g = dir / "g";
  ASSERT_EQ(run("gen-synth --seed 4 --noise 0.3 --conversations 10 --utterances 4 --modes Tag012 --out " + q(g)), 0);
  const std::string base = "crossval --seed 9 --k 5 --holdout 001M002F --corpus " + q(g / "corpus.jsonl") +
                           " --emissions " + q(g / "emissions/Tag012") + " --mode Tag012 --json ";
  ASSERT_EQ(run(base + q(dir / "a.json") + " --table " + q(dir / "a.txt")), 0);
  ASSERT_EQ(run(base + q(dir / "b.json") + " --threads 4"), 0);
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  EXPECT_NE(slurp(dir / "a.txt").find("001M002F"), std::string::npos);
}

}  // namespace
