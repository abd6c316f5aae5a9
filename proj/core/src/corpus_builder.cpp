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

#include "pxre/corpus_builder.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pxre/error.hpp"
#include "pxre/logging.hpp"
#include "pxre/rng.hpp"

namespace pxre {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string lower_ascii(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::vector<int>> children_of(const ParsedSentence& s) {
  std::vector<std::vector<int>> kids(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.heads[i] > 0) kids[static_cast<std::size_t>(s.heads[i] - 1)].push_back(static_cast<int>(i));
  }
  return kids;
}

void collect(const std::vector<std::vector<int>>& kids, int node, std::vector<int>& out) {
  out.push_back(node);
  for (int c : kids[static_cast<std::size_t>(node)]) collect(kids, c, out);
}

Span argument_span(const ParsedSentence& s, const std::vector<std::vector<int>>& kids, int arg) {
  std::vector<int> nodes{arg};
  for (int c : kids[static_cast<std::size_t>(arg)]) {
    const auto& rel = s.deprels[static_cast<std::size_t>(c)];
    if (rel == "case" || rel == "punct") continue;
    collect(kids, c, nodes);
  }
  const auto [lo, hi] = std::minmax_element(nodes.begin(), nodes.end());
  return {*lo, *hi + 1};
}

std::optional<int> find_run(std::span<const std::string> hay, std::span<const std::string> needle,
                            const std::optional<Span>& avoid) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (!std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) {
      continue;
    }
    const int start = static_cast<int>(i);
    const int end = start + static_cast<int>(needle.size());
    if (avoid && start < avoid->end && avoid->start < end) continue;
    return start;
  }
  return std::nullopt;
}

}  // namespace

int ParsedSentence::root() const {
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (heads[i] == 0) return static_cast<int>(i);
  }
  throw DataError("sentence " + id + " has no root");
}

void check_tree(const ParsedSentence& s) {
  const std::string where = "sentence " + s.id;
  const std::size_t n = s.tokens.size();
  if (s.lemmas.size() != n || s.upos.size() != n || s.heads.size() != n || s.deprels.size() != n) {
    throw DataError(where + ": column arrays differ in length");
  }
  if (n == 0) throw DataError(where + ": empty sentence");
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int h = s.heads[i];
    if (h < 0 || h > static_cast<int>(n)) {
      throw DataError(where + ": token " + std::to_string(i + 1) + " has head " +
                      std::to_string(h) + " outside the sentence");
    }
    if (h == static_cast<int>(i + 1)) {
      throw DataError(where + ": token " + std::to_string(i + 1) + " is its own head (cycle)");
    }
    if (h == 0) ++roots;
  }
  if (roots != 1) {
    throw DataError(where + ": expected exactly one root, found " + std::to_string(roots));
  }
  for (std::size_t i = 0; i < n; ++i) {
    int cur = static_cast<int>(i + 1);
    std::size_t steps = 0;
    while (cur != 0) {
      cur = s.heads[static_cast<std::size_t>(cur - 1)];
      if (++steps > n) {
        throw DataError(where + ": head cycle through token " + std::to_string(i + 1));
      }
    }
  }
}

std::vector<ParsedSentence> parse_conllu(std::string_view text, std::string_view source) {
  std::vector<ParsedSentence> out;
  ParsedSentence cur;
  std::string pending_id;
  auto flush = [&] {
    if (cur.tokens.empty()) {
      pending_id.clear();
      return;
    }
    cur.id = pending_id.empty() ? "s" + std::to_string(out.size() + 1) : pending_id;
    check_tree(cur);
    out.push_back(std::move(cur));
    cur = ParsedSentence{};
    pending_id.clear();
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string_view body(line);
      const auto eq = body.find('=');
      auto key = body.substr(1, eq == std::string_view::npos ? std::string_view::npos : eq - 1);
      while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
      while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
      if (key == "sent_id" && eq != std::string_view::npos) {
        auto value = body.substr(eq + 1);
        while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
        while (!value.empty() && value.back() == ' ') value.remove_suffix(1);
        pending_id = std::string(value);
      }
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw DataError(where + ": expected 10 tab-separated columns, got " +
                      std::to_string(cols.size()));
    }
    if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos) continue;
    int id = 0;
    int head = 0;
    if (!parse_int(cols[0], id) || id != static_cast<int>(cur.tokens.size()) + 1) {
      throw DataError(where + ": expected token id " + std::to_string(cur.tokens.size() + 1) +
                      ", got '" + cols[0] + "'");
    }
    if (!parse_int(cols[6], head)) {
      throw DataError(where + ": malformed head '" + cols[6] + "'");
    }
    cur.tokens.push_back(cols[1]);
    cur.lemmas.push_back(cols[2]);
    cur.upos.push_back(cols[3]);
    cur.heads.push_back(head);
    cur.deprels.push_back(cols[7]);
  }
  flush();
  return out;
}

std::vector<ParsedSentence> ingest_conllu(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_conllu(buf.str(), path.string());
}

std::vector<RelationTriple> extract_triples(const ParsedSentence& s) {
  const auto kids = children_of(s);
  std::vector<RelationTriple> out;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const auto& pk = kids[p];
    const bool copular = std::any_of(pk.begin(), pk.end(), [&](int c) {
      return s.deprels[static_cast<std::size_t>(c)] == "cop";
    });
    if (s.upos[p] != "VERB" && !copular) continue;
    std::vector<int> subjects;
    std::vector<int> objects;
    std::vector<int> predicate{static_cast<int>(p)};
    for (int c : pk) {
      const auto& rel = s.deprels[static_cast<std::size_t>(c)];
      if (rel == "nsubj" || rel == "nsubj:pass") subjects.push_back(c);
      if (rel == "obj" || rel == "iobj" || rel == "obl") objects.push_back(c);
      if (rel == "cop" || rel == "compound:prt") predicate.push_back(c);
    }
    for (int subj : subjects) {
      for (int obj : objects) {
        std::vector<int> surface = predicate;
        for (int c : kids[static_cast<std::size_t>(obj)]) {
          if (s.deprels[static_cast<std::size_t>(c)] == "case") surface.push_back(c);
        }
        std::sort(surface.begin(), surface.end());
        RelationTriple t;
        t.sentence_id = s.id;
        t.subj = argument_span(s, kids, subj);
        t.obj = argument_span(s, kids, obj);
        for (int i : surface) t.relation_surface.push_back(s.tokens[static_cast<std::size_t>(i)]);
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

const Lexicon& default_lexicon() {
  static const Lexicon lexicon = {
      {"acquired", "acquire"}, {"acquires", "acquire"}, {"am", "be"},
      {"are", "be"},           {"became", "become"},    {"becomes", "become"},
      {"began", "begin"},      {"begins", "begin"},     {"born", "bear"},
      {"bought", "buy"},       {"buys", "buy"},         {"built", "build"},
      {"builds", "build"},     {"created", "create"},   {"creates", "create"},
      {"died", "die"},         {"dies", "die"},         {"directed", "direct"},
      {"founded", "found"},    {"founds", "found"},     {"gave", "give"},
      {"gives", "give"},       {"had", "have"},         {"has", "have"},
      {"is", "be"},            {"joined", "join"},      {"joins", "join"},
      {"led", "lead"},         {"leads", "lead"},       {"lived", "live"},
      {"lives", "live"},       {"located", "locate"},   {"made", "make"},
      {"makes", "make"},       {"married", "marry"},    {"marries", "marry"},
      {"moved", "move"},       {"moves", "move"},       {"owned", "own"},
      {"owns", "own"},         {"played", "play"},      {"plays", "play"},
      {"produced", "produce"}, {"produces", "produce"}, {"published", "publish"},
      {"sold", "sell"},        {"sells", "sell"},       {"signed", "sign"},
      {"signs", "sign"},       {"studied", "study"},    {"studies", "study"},
      {"took", "take"},        {"takes", "take"},       {"visited", "visit"},
      {"visits", "visit"},     {"was", "be"},           {"were", "be"},
      {"won", "win"},          {"wins", "win"},         {"worked", "work"},
      {"works", "work"},       {"wrote", "write"},      {"writes", "write"},
  };
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path, Lexicon base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read lexicon '" + path.string() + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 'form<TAB>lemma'");
    }
    base[lower_ascii(cols[0])] = cols[1];
  }
  return base;
}

std::string lemmatize_relation(std::span<const std::string> surface, const Lexicon& lexicon) {
  std::string out;
  for (const auto& tok : surface) {
    const std::string low = lower_ascii(tok);
    const auto it = lexicon.find(low);
    if (!out.empty()) out += ' ';
    out += it == lexicon.end() ? low : it->second;
  }
  return out;
}

TopK select_top_k(std::span<const KeyedTriple> triples, std::size_t k) {
  if (k < 1) throw ConfigError("k must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& t : triples) ++counts[t.key];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() < k) {
    log::warn("fewer relation keys than k; keeping all",
              {{"keys", std::to_string(ranked.size())}, {"k", std::to_string(k)}});
  } else {
    ranked.resize(k);
  }
  std::set<std::string> keep;
  std::vector<std::string> labels;
  for (const auto& [key, n] : ranked) {
    keep.insert(key);
    labels.push_back(key);
  }
  TopK out;
  for (const auto& t : triples) {
    if (keep.count(t.key)) out.kept.push_back(t);
  }
  out.labels = LabelSpace(std::move(labels));
  out.counts = std::move(ranked);
  return out;
}

std::vector<ParallelRecord> align_parallel(std::vector<ParsedSentence> sentences,
                                           std::span<const std::string> target_lines) {
  if (sentences.size() != target_lines.size()) {
    throw DataError("parallel corpus mismatch: " + std::to_string(sentences.size()) +
                    " parsed sentences but " + std::to_string(target_lines.size()) +
                    " target lines");
  }
  std::vector<ParallelRecord> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    ParallelRecord r;
    std::istringstream words(target_lines[i]);
    for (std::string w; words >> w;) r.target_tokens.push_back(w);
    r.alignment_id = sentences[i].id;
    r.source = std::move(sentences[i]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RelationInstance> build_instances(std::span<const ParallelRecord> records,
                                              std::span<const KeyedTriple> kept,
                                              const std::string& target_lang,
                                              BuildStats* stats) {
  std::map<std::string, const ParallelRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.alignment_id, &r);
  std::map<std::string, int> counters;
  std::map<std::tuple<std::string, int, int, int, int>, std::string> pair_labels;
  BuildStats local;
  std::vector<RelationInstance> out;
  for (const auto& kt : kept) {
    const auto it = by_id.find(kt.triple.sentence_id);
    if (it == by_id.end()) {
      throw DataError("no parallel record with alignment id '" + kt.triple.sentence_id + "'");
    }
    const ParallelRecord& rec = *it->second;
    const auto& src = rec.source.tokens;
    auto slice = [&](Span s) {
      return std::vector<std::string>(src.begin() + s.start, src.begin() + s.end);
    };
    const auto subj_words = slice(kt.triple.subj);
    const auto obj_words = slice(kt.triple.obj);

    RelationInstance inst;
    inst.id = rec.alignment_id + "-" + std::to_string(++counters[rec.alignment_id]);
    inst.lang = target_lang;
    inst.tokens = rec.target_tokens;
    inst.label = kt.key;
    const auto s = find_run(inst.tokens, subj_words, std::nullopt);
    std::optional<int> o;
    if (s) o = find_run(inst.tokens, obj_words, Span{*s, *s + static_cast<int>(subj_words.size())});
    if (s && o) {
      inst.subj = {*s, *s + static_cast<int>(subj_words.size())};
      inst.obj = {*o, *o + static_cast<int>(obj_words.size())};
      std::string joined;
      for (const auto& t : inst.tokens) joined += t + '\x1f';
      const auto key = std::make_tuple(joined, inst.subj.start, inst.subj.end, inst.obj.start,
                                       inst.obj.end);
      const auto [pl, inserted] = pair_labels.emplace(key, inst.label);
      if (!inserted && pl->second != inst.label) {
        ++local.conflicts_dropped;
        continue;
      }
      ++local.located;
    } else {
      inst.label_only = true;
      inst.subj = {0, 0};
      inst.obj = {0, 0};
      ++local.label_only;
    }
    out.push_back(std::move(inst));
  }
  local.instances = out.size();
  if (stats) *stats = local;
  return out;
}

void check_ratios(const std::array<double, 3>& ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("split ratios must be non-negative");
    sum += r;
  }
  if (!(ratios[0] > 0.0)) throw ConfigError("train ratio must be positive");
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  check_ratios(ratios);
  // A tiny epsilon keeps exact products such as 1000 * 0.0225 from flooring
  // one below their decimal value.
  auto share = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  const std::size_t dev = share(ratios[1]);
  const std::size_t test = share(ratios[2]);
  return {n - dev - test, dev, test};
}

SplitResult split_instances(std::vector<RelationInstance> instances,
                            const std::array<double, 3>& ratios, std::uint64_t seed,
                            const LabelSpace& labels, const std::string& name,
                            const std::string& lang) {
  const auto sizes = split_sizes(instances.size(), ratios);
  Rng rng(seed);
  rng.shuffle(instances);
  SplitResult out;
  Dataset* parts[] = {&out.train, &out.dev, &out.test};
  const Split splits[] = {Split::kTrain, Split::kDev, Split::kTest};
  std::size_t cursor = 0;
  for (int i = 0; i < 3; ++i) {
    Dataset& d = *parts[i];
    d.name = name;
    d.lang = lang;
    d.split = splits[i];
    d.label_space = labels;
    for (std::size_t k = 0; k < sizes[static_cast<std::size_t>(i)]; ++k) {
      d.instances.push_back(std::move(instances[cursor++]));
    }
  }
  return out;
}

double BuildReport::unmatched_rate() const {
  return stats.instances == 0 ? 0.0
                              : static_cast<double>(stats.label_only) /
                                    static_cast<double>(stats.instances);
}

std::string BuildReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "pxre.build_report/1";
  j["sentences"] = sentences;
  j["triples"] = triples;
  j["kept_triples"] = kept_triples;
  j["k"] = k;
  j["seed"] = seed;
  j["ratios"] = {ratios[0], ratios[1], ratios[2]};
  j["split"] = {{"train", split[0]}, {"dev", split[1]}, {"test", split[2]}};
  j["instances"] = stats.instances;
  j["located"] = stats.located;
  j["label_only"] = stats.label_only;
  j["conflicts_dropped"] = stats.conflicts_dropped;
  j["unmatched_rate"] = unmatched_rate();
  nlohmann::ordered_json top = nlohmann::ordered_json::array();
  for (const auto& [key, n] : top_k) top.push_back({{"key", key}, {"count", n}});
  j["top_k"] = std::move(top);
  return j.dump(2) + "\n";
}

void split_emit(const SplitResult& split, const BuildReport& report,
                const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create output directory '" + outdir.string() + "': " + ec.message());
  write_jsonl(outdir / "train.jsonl", split.train);
  write_jsonl(outdir / "dev.jsonl", split.dev);
  write_jsonl(outdir / "test.jsonl", split.test);
  const auto path = outdir / "build_report.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << report.to_json();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

BuildReport build_corpus(const std::filesystem::path& conllu, const std::filesystem::path& target,
                         const CorpusBuildOptions& options, const std::filesystem::path& outdir) {
  check_ratios(options.ratios);
  auto sentences = ingest_conllu(conllu);
  std::ifstream in(target, std::ios::binary);
  if (!in) throw IoError("cannot read '" + target.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }

  BuildReport report;
  report.sentences = sentences.size();
  report.k = options.k;
  report.seed = options.seed;
  report.ratios = options.ratios;

  std::vector<KeyedTriple> keyed;
  for (const auto& s : sentences) {
    for (auto& t : extract_triples(s)) {
      std::string key = lemmatize_relation(t.relation_surface, options.lexicon);
      keyed.push_back({std::move(t), std::move(key)});
    }
  }
  report.triples = keyed.size();
  const auto records = align_parallel(std::move(sentences), lines);
  const TopK top = select_top_k(keyed, options.k);
  report.kept_triples = top.kept.size();
  report.top_k = top.counts;

  auto instances = build_instances(records, top.kept, options.target_lang, &report.stats);
  SplitResult split = split_instances(std::move(instances), options.ratios, options.seed,
                                      top.labels, options.name, options.target_lang);
  report.split = {split.train.size(), split.dev.size(), split.test.size()};
  for (const Dataset* d : {&split.train, &split.dev, &split.test}) {
    const auto violations = validate(*d);
    if (!violations.empty()) {
      throw DataError("built instance " + violations.front().instance_id +
                      " fails validation: " + violations.front().message);
    }
  }
  split_emit(split, report, outdir);
  return report;
}

}  // namespace pxre
