// Copyright 2026 The pxre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pxre/relation_data.hpp"

namespace pxre {

/// One dependency-parsed sentence. heads[i] is the 1-based parent of token
/// i, 0 for the root.
struct ParsedSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> lemmas;
  std::vector<std::string> upos;
  std::vector<int> heads;
  std::vector<std::string> deprels;

  std::size_t size() const { return tokens.size(); }
  /// 0-based index of the root token.
  int root() const;
};

/// Throws DataError naming the sentence for length mismatches, zero or
/// several roots, out-of-range heads and cycles.
void check_tree(const ParsedSentence& sentence);

/// Reads CoNLL-U. Multiword-token ranges and empty nodes are skipped;
/// "# sent_id = X" names the following sentence (default "s<N>").
std::vector<ParsedSentence> ingest_conllu(const std::filesystem::path& path);
std::vector<ParsedSentence> parse_conllu(std::string_view text, std::string_view source);

struct RelationTriple {
  std::string sentence_id;
  Span subj;
  std::vector<std::string> relation_surface;
  Span obj;

  bool operator==(const RelationTriple&) const = default;
};

/// Predicate-pattern extraction. Predicates are VERB tokens and heads of a
/// `cop` dependent. Each pairs every nsubj/nsubj:pass dependent with every
/// obj/iobj/obl dependent. The surface is, in sentence order, the
/// predicate, its cop and compound:prt dependents, and the object's case
/// dependents. An argument span is the contiguous extent of its subtree
/// minus leading/trailing case and punct dependents of the argument.
std::vector<RelationTriple> extract_triples(const ParsedSentence& sentence);

using Lexicon = std::map<std::string, std::string, std::less<>>;

/// Small built-in English inflection -> lemma table.
const Lexicon& default_lexicon();
/// Two-column TSV form -> lemma; entries override `base`.
Lexicon load_lexicon(const std::filesystem::path& path, Lexicon base = {});

/// Lowercases each token, maps it through the lexicon, joins with spaces.
std::string lemmatize_relation(std::span<const std::string> surface, const Lexicon& lexicon);

struct KeyedTriple {
  RelationTriple triple;
  std::string key;
};

struct TopK {
  std::vector<KeyedTriple> kept;
  LabelSpace labels;  // kept keys by descending frequency, ties lexicographic
  std::vector<std::pair<std::string, std::size_t>> counts;  // same order, kept keys only
};

/// Keeps triples whose key is among the k most frequent. Warns and keeps
/// everything when fewer than k keys exist. Throws ConfigError for k < 1.
TopK select_top_k(std::span<const KeyedTriple> triples, std::size_t k);

struct ParallelRecord {
  ParsedSentence source;
  std::vector<std::string> target_tokens;
  std::string alignment_id;
};

/// Pairs sentences with whitespace-tokenized target lines by position.
/// Throws DataError when the counts differ.
std::vector<ParallelRecord> align_parallel(std::vector<ParsedSentence> sentences,
                                           std::span<const std::string> target_lines);

struct BuildStats {
  std::size_t instances = 0;
  std::size_t located = 0;
  std::size_t label_only = 0;
  /// Located instances dropped because an earlier instance already gave
  /// the same sentence and entity pair a different label.
  std::size_t conflicts_dropped = 0;
};

/// One instance per kept triple on the target sentence. Entity spans are
/// the first exact token match of each source entity (subject first, the
/// object search skipping overlaps); otherwise a label-only instance.
/// Instance ids are "<alignment id>-<n>" with n counting from 1 per record.
/// Throws DataError when a triple's sentence has no record.
std::vector<RelationInstance> build_instances(std::span<const ParallelRecord> records,
                                              std::span<const KeyedTriple> kept,
                                              const std::string& target_lang,
                                              BuildStats* stats = nullptr);

/// Floor of n * ratio for dev and test, train takes the remainder.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios);

struct SplitResult {
  Dataset train;
  Dataset dev;
  Dataset test;
};

/// Seeded Fisher-Yates shuffle, then contiguous train/dev/test partition.
SplitResult split_instances(std::vector<RelationInstance> instances,
                            const std::array<double, 3>& ratios, std::uint64_t seed,
                            const LabelSpace& labels, const std::string& name,
                            const std::string& lang);

struct BuildReport {
  std::size_t sentences = 0;
  std::size_t triples = 0;
  std::size_t kept_triples = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{};
  std::array<std::size_t, 3> split{};
  BuildStats stats;
  std::vector<std::pair<std::string, std::size_t>> top_k;

  double unmatched_rate() const;
  std::string to_json() const;
};

/// Writes train/dev/test.jsonl and build_report.json. Throws IoError when
/// outdir cannot be created or written.
void split_emit(const SplitResult& split, const BuildReport& report,
                const std::filesystem::path& outdir);

struct CorpusBuildOptions {
  std::size_t k = 106;
  std::array<double, 3> ratios{0.9424, 0.0225, 0.0351};
  std::uint64_t seed = 1;
  std::string target_lang = "zh";
  std::string name = "wmt17-enzh";
  Lexicon lexicon = default_lexicon();
};

/// Full pipeline: ingest, extract, lemmatize, top-K, build, split, emit.
BuildReport build_corpus(const std::filesystem::path& conllu, const std::filesystem::path& target,
                         const CorpusBuildOptions& options, const std::filesystem::path& outdir);

/// Throws ConfigError unless the ratios are non-negative with a positive
/// train share and sum to 1 within 1e-9.
void check_ratios(const std::array<double, 3>& ratios);

}  // namespace pxre
