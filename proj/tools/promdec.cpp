// tools/promdec.cpp

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

// Command-line front end: corpus preparation, decoding, scoring and
// cross-validation runs.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "promdec/promdec.hpp"

namespace fs = std::filesystem;
using namespace promdec;

namespace {

// Expands `--config FILE` into `--key=value` arguments for every key the
// command line does not already set.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  auto given = [&](const std::string& key) {
    for (const auto& a : args) {
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    }
    return false;
  };
  std::size_t lineno = 0;
  for (const auto& line : textio::read_lines(path)) {
    ++lineno;
    const auto t = textio::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(path + ": expected key=value", lineno);
    const std::string key(textio::trim(t.substr(0, eq)));
    const std::string value(textio::trim(t.substr(eq + 1)));
    if (key.empty()) throw ParseError(path + ": empty key", lineno);
    if (!given(key)) args.push_back("--" + key + "=" + value);
  }
  return args;
}

TaggingMode mode_option(const std::string& s) {
  try {
    return parse_mode(s);
  } catch (const Error&) {
    throw CLI::ValidationError("--mode", "unknown tagging mode " + s);
  }
}

std::set<std::string> split_list(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = textio::trim(item);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  auto out = textio::open_out(path);
  out << text;
}

std::vector<fs::path> emission_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".promem") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::map<std::string, std::string> tsv_map(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (auto& [k, v] : textio::read_tsv(path)) {
    if (!out.emplace(k, v).second) throw InputError(path.string() + ": duplicate id " + k);
  }
  return out;
}

// Orthographic words of a reference-format token string.
std::vector<std::string> words_of(const std::vector<Token>& tokens) {
  std::vector<std::string> words;
  std::string cur;
  for (const auto& t : tokens) {
    if (t.is_boundary()) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else if (t.is_char()) {
      unicode::append_utf8(cur, t.base);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

struct Options {
  std::uint64_t seed = 0;
  std::string in, out, corpus, mode = "Det02", refs, vocab, lexicon, lm, emissions, hyp, ref, task;
  std::string json, table, holdout, decode = "lexfree";
  int order = 3;
  bool fallback = true, keep_tags = true, use_lm = true;
  std::size_t beam = 100, k = 10, threads = 1;
  double alpha = 0.8, beta = 1.0;
  synth::CorpusOptions corpus_opt;
  synth::EmissionOptions emission_opt;
  std::string modes = "Det02,Det012,Baseline,Tag0,Tag2,Tag02,Tag012";
};

int run(int argc, char** argv) {
  CLI::App app{"promdec: prominence detection with CTC decoding"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  if (const char* env = std::getenv("PROMDEC_SEED")) {
    try {
      o.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "promdec: PROMDEC_SEED is not an unsigned integer\n";
      return 1;
    }
  }
  app.add_option("--seed", o.seed, "Random seed (default: $PROMDEC_SEED or 0)");
  app.set_help_flag("-h,--help");
  app.footer("Any subcommand accepts --config FILE with key=value lines naming its long flags.");

  auto* normalize = app.add_subcommand("normalize", "Normalize corpus transcripts");
  normalize->add_option("--in", o.in, "Input corpus (JSONL)")->required();
  normalize->add_option("--out", o.out, "Output corpus (JSONL)")->required();

  auto* make_refs = app.add_subcommand("make-refs", "Write reference strings for a tagging mode");
  make_refs->add_option("--corpus", o.corpus)->required();
  make_refs->add_option("--mode", o.mode)->required();
  make_refs->add_option("--out", o.out)->required();

  auto* build_vocab_cmd = app.add_subcommand("build-vocab", "Derive a token set from references");
  build_vocab_cmd->add_option("--refs", o.refs)->required();
  build_vocab_cmd->add_option("--mode", o.mode)->required();
  build_vocab_cmd->add_option("--out", o.out)->required();

  auto* build_lexicon_cmd = app.add_subcommand("build-lexicon", "Collect the word list of a corpus");
  build_lexicon_cmd->add_option("--corpus", o.corpus)->required();
  build_lexicon_cmd->add_option("--out", o.out)->required();

  auto* train_lm = app.add_subcommand("train-lm", "Estimate a modified Kneser-Ney language model");
  auto* lm_corpus = train_lm->add_option("--corpus", o.corpus, "Corpus (JSONL)");
  auto* lm_text = train_lm->add_option("--text", o.in, "One sentence per line");
  lm_corpus->excludes(lm_text);
  train_lm->add_option("--order", o.order)->check(CLI::Range(1, lm::kMaxOrder));
  train_lm->add_option("--fallback", o.fallback, "Use D=0.5 when counts-of-counts are degenerate");
  train_lm->add_option("--out", o.out)->required();

  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic corpus with emissions");
  gen->add_option("--out", o.out, "Output directory")->required();
  gen->add_option("--conversations", o.corpus_opt.conversations);
  gen->add_option("--utterances", o.corpus_opt.utterances_per_conversation, "Utterances per conversation");
  gen->add_option("--min-words", o.corpus_opt.min_words);
  gen->add_option("--max-words", o.corpus_opt.max_words);
  gen->add_option("--lexicon-size", o.corpus_opt.lexicon_size);
  gen->add_option("--pl1", o.corpus_opt.include_pl1);
  gen->add_option("--unannotated-rate", o.corpus_opt.unannotated_rate)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--excluded-rate", o.corpus_opt.excluded_rate)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--frames-per-token", o.emission_opt.frames_per_token)->check(CLI::Range(2, 1000));
  gen->add_option("--noise", o.emission_opt.noise)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--level-flip-rate", o.emission_opt.level_flip_rate)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--char-error-rate", o.emission_opt.char_error_rate)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--modes", o.modes, "Comma-separated tagging modes");

  auto* decode = app.add_subcommand("decode", "Decode a directory of emission files");
  decode->add_option("--mode", o.decode, "lexfree, lex or lm")
      ->check(CLI::IsMember({"lexfree", "lex", "lm"}, CLI::ignore_case));
  decode->add_option("--emissions", o.emissions)->required();
  decode->add_option("--vocab", o.vocab, "Expected token set; emissions are reindexed to it");
  decode->add_option("--lexicon", o.lexicon);
  decode->add_option("--lm", o.lm, "ARPA language model");
  decode->add_option("--beam", o.beam)->check(CLI::PositiveNumber);
  decode->add_option("--alpha", o.alpha, "LM weight");
  decode->add_option("--beta", o.beta, "Word insertion bonus");
  decode->add_option("--keep-tags", o.keep_tags, "Keep prominence tags in lexfree output");
  decode->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  decode->add_option("--out", o.out)->required();

  auto* extract = app.add_subcommand("extract-prom", "Extract word prominence levels from hypotheses");
  extract->add_option("--hyp", o.hyp)->required();
  extract->add_option("--mode", o.mode)->required();
  extract->add_option("--out", o.out)->required();

  auto* score = app.add_subcommand("score", "Score hypotheses against references");
  score->add_option("--task", o.task)->required()->check(CLI::IsMember({"detector", "asr"}));
  score->add_option("--ref", o.ref)->required();
  score->add_option("--hyp", o.hyp)->required();
  score->add_option("--mode", o.mode);
  score->add_option("--json", o.json, "Report JSON path");
  score->add_option("--table", o.table, "Text table path (default: stdout)");

  auto* crossval = app.add_subcommand("crossval", "Run k-fold cross-validation");
  crossval->add_option("--corpus", o.corpus)->required();
  crossval->add_option("--emissions", o.emissions, "Directory of <utterance>.promem files")->required();
  crossval->add_option("--mode", o.mode)->required();
  crossval->add_option("--k", o.k)->check(CLI::Range(2, 1000));
  crossval->add_option("--holdout", o.holdout, "Comma-separated held-out conversation ids");
  crossval->add_option("--lexicon", o.lexicon);
  crossval->add_option("--use-lm", o.use_lm);
  crossval->add_option("--order", o.order)->check(CLI::Range(1, lm::kMaxOrder));
  crossval->add_option("--beam", o.beam)->check(CLI::PositiveNumber);
  crossval->add_option("--alpha", o.alpha);
  crossval->add_option("--beta", o.beta);
  crossval->add_option("--threads", o.threads)->check(CLI::PositiveNumber);
  crossval->add_option("--json", o.json)->required();
  crossval->add_option("--table", o.table);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const Error& e) {
    std::cerr << "promdec: " << e.what() << '\n';
    return 2;
  }
  std::reverse(args.begin(), args.end());
  args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return 1;
  }

  if (*normalize) {
    write_corpus(normalize_corpus(read_corpus(o.in)), o.out);
  } else if (*make_refs) {
    const auto mode = mode_option(o.mode);
    std::vector<textio::TsvRecord> rows;
    std::size_t skipped = 0;
    for (const auto& u : read_corpus(o.corpus)) {
      try {
        rows.emplace_back(u.id, reference_for(u, mode));
      } catch (const ModeError&) {
        ++skipped;
      } catch (const IncompleteAnnotationError&) {
        ++skipped;
      }
    }
    textio::write_tsv(o.out, rows);
    if (skipped) std::cerr << "promdec: skipped " << skipped << " utterances not expressible in " << o.mode << '\n';
  } else if (*build_vocab_cmd) {
    const auto mode = mode_option(o.mode);
    std::vector<std::string> refs;
    for (auto& [id, ref] : textio::read_tsv(o.refs)) refs.push_back(std::move(ref));
    write_vocab(build_vocab(refs, mode), o.out);
  } else if (*build_lexicon_cmd) {
    write_lexicon(build_lexicon(read_corpus(o.corpus)), o.out);
  } else if (*train_lm) {
    std::vector<lm::Sentence> sentences;
    if (!o.corpus.empty()) {
      for (const auto& u : read_corpus(o.corpus)) sentences.push_back(u.words());
    } else if (!o.in.empty()) {
      sentences = lm::read_sentences(o.in);
    } else {
      std::cerr << "promdec: train-lm needs --corpus or --text\n";
      return 1;
    }
    lm::MknOptions opt;
    opt.degenerate_fallback = o.fallback;
    lm::write_arpa(lm::train(sentences, o.order, opt), fs::path(o.out));
  } else if (*gen) {
    std::vector<TaggingMode> modes;
    for (const auto& m : split_list(o.modes)) modes.push_back(mode_option(m));
    std::sort(modes.begin(), modes.end());
    o.corpus_opt.seed = o.seed;
    o.emission_opt.seed = o.seed;
    const Corpus corpus = synth::make_corpus(o.corpus_opt);
    fs::create_directories(o.out);
    write_corpus(corpus, fs::path(o.out) / "corpus.jsonl");
    write_lexicon(build_lexicon(filter_corpus(corpus)), fs::path(o.out) / "lexicon.txt");
    for (auto m : modes) synth::write_mode_data(synth::make_mode_data(corpus, m, o.emission_opt), o.out);
  } else if (*decode) {
    std::string mode = o.decode;
    std::transform(mode.begin(), mode.end(), mode.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto files = emission_files(o.emissions);
    std::optional<TokenSet> expected;
    if (!o.vocab.empty()) expected = read_vocab(o.vocab);
    std::optional<LexiconTrie> trie;
    std::optional<lm::NGramModel> model;
    DecodeConfig cfg;
    cfg.beam_width = o.beam;
    cfg.lm_weight = o.alpha;
    cfg.word_bonus = o.beta;
    cfg.mode = mode == "lexfree" ? DecodeMode::Lexfree : mode == "lex" ? DecodeMode::Lex : DecodeMode::LMBeam;
    cfg.validate();
    if (cfg.mode != DecodeMode::Lexfree) {
      if (o.lexicon.empty()) {
        std::cerr << "promdec: --mode " << mode << " needs --lexicon\n";
        return 1;
      }
      trie.emplace(read_lexicon(o.lexicon));
    }
    if (cfg.mode == DecodeMode::LMBeam) {
      if (o.lm.empty()) {
        std::cerr << "promdec: --mode lm needs --lm\n";
        return 1;
      }
      model = lm::read_arpa(fs::path(o.lm));
    }
    auto rows = parallel_map(files.size(), o.threads, [&](std::size_t i) {
      auto [m, v] = fs::exists(vocab_sidecar(files[i])) || !expected
                        ? read_emissions_with_vocab(files[i])
                        : std::pair<EmissionMatrix, TokenSet>(read_emissions(files[i]), *expected);
      if (expected && !(v == *expected)) {
        m = reindex(m, v, *expected);
        v = *expected;
      }
      Hypothesis h;
      TokenSet out_vocab = v;
      if (cfg.mode == DecodeMode::Lexfree) {
        h = o.keep_tags ? decode_lexfree_tagged(m, v) : lexfree_decode(m, v);
        if (!o.keep_tags && v.has_tags()) {
          out_vocab = strip_tags(v);
          m = marginalize_tags(m, v, out_vocab);
          h = lexfree_decode(m, out_vocab);
        }
      } else {
        out_vocab = strip_tags(v);
        if (v.has_tags()) m = marginalize_tags(m, v, out_vocab);
        h = beam_decode(m, out_vocab, *trie, model ? &*model : nullptr, cfg);
      }
      return textio::TsvRecord(files[i].stem().string(), render_tokens(out_vocab.decode(h.tokens)));
    });
    textio::write_tsv(o.out, rows);
  } else if (*extract) {
    const auto mode = mode_option(o.mode);
    std::vector<LevelRecord> rows;
    for (const auto& [id, hyp] : textio::read_tsv(o.hyp)) rows.push_back({id, extract_sequence(hyp, mode)});
    write_levels(rows, o.out);
  } else if (*score) {
    const auto refs = tsv_map(o.ref);
    const auto hyps = tsv_map(o.hyp);
    for (const auto& [id, _] : hyps) {
      if (!refs.count(id)) std::cerr << "promdec: ignoring hypothesis without reference: " << id << '\n';
    }
    const bool detector = o.task == "detector";
    const auto mode = o.mode.empty() ? (detector ? TaggingMode::Det012 : TaggingMode::Tag012) : mode_option(o.mode);
    if (detector != is_detector_mode(mode)) {
      std::cerr << "promdec: mode " << o.mode << " does not fit task " << o.task << '\n';
      return 1;
    }
    std::vector<UtteranceRecord> records;
    for (const auto& [id, ref] : refs) {
      auto it = hyps.find(id);
      const std::string hyp = it == hyps.end() ? std::string() : it->second;
      UtteranceRecord r;
      r.id = id;
      const auto ref_tokens = parse_tokens(ref, mode);
      const auto hyp_tokens = parse_tokens(hyp, mode);
      if (!detector) r.word_edits = edit_distance(words_of(ref_tokens), words_of(hyp_tokens));
      if (mode != TaggingMode::Baseline) {
        auto ref_levels = extract_sequence(std::span<const Token>(ref_tokens));
        if (std::all_of(ref_levels.begin(), ref_levels.end(), [](const LevelHyp& l) { return l.has_value(); })) {
          r.ref_levels = std::move(ref_levels);
          r.hyp_levels = extract_sequence(std::span<const Token>(hyp_tokens));
        }
      }
      records.push_back(std::move(r));
    }
    const auto report = make_report(fs::path(o.hyp).stem().string(), std::move(records));
    std::string table;
    if (detector) {
      table = render_table({{std::string(mode_name(mode)), report.name, &report}});
    } else {
      const EvalReport none;
      table = render_wer_table(std::string(mode_name(mode)), report, none, none);
      if (mode != TaggingMode::Baseline) table += render_table({{std::string(mode_name(mode)), report.name, &report}});
    }
    write_text(o.table, table);
    if (!o.json.empty()) write_text(o.json, to_json(report).dump(2) + "\n");
  } else if (*crossval) {
    const auto mode = mode_option(o.mode);
    const Corpus corpus = read_corpus(o.corpus);
    RunConfig cfg;
    cfg.mode = mode;
    cfg.decode.beam_width = o.beam;
    cfg.decode.lm_weight = o.alpha;
    cfg.decode.word_bonus = o.beta;
    cfg.decode.validate();
    cfg.use_lm = o.use_lm;
    cfg.lm_order = o.order;
    cfg.emissions_dir = o.emissions;
    cfg.threads = o.threads;
    if (!o.lexicon.empty()) cfg.lexicon = read_lexicon(o.lexicon);
    cfg.plan = make_folds(corpus, o.k, o.seed, split_list(o.holdout));
    nlohmann::json doc;
    std::string table;
    if (is_detector_mode(mode)) {
      const auto r = run_detector_eval(corpus, cfg);
      doc = to_json(r, cfg);
      table = render_table(r, mode);
    } else {
      const auto r = run_asr_eval(corpus, cfg);
      doc = to_json(r, cfg);
      table = render_table(r, mode);
    }
    write_text(o.json, doc.dump(2) + "\n");
    if (!o.table.empty()) write_text(o.table, table);
    else std::cout << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "promdec: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "promdec: " << e.what() << '\n';
    return 2;
  }
}
