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

#include "pxre/relation_data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "pxre/error.hpp"

namespace pxre {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> slice(const std::vector<std::string>& tokens, Span span) {
  if (span.start < 0 || span.end > static_cast<int>(tokens.size()) || span.empty()) return {};
  return {tokens.begin() + span.start, tokens.begin() + span.end};
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

Span span_from_json(const json& value, std::string_view key) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number_integer() ||
      !value[1].is_number_integer()) {
    throw DataError(std::string(key) + " must be a [start, end] integer pair");
  }
  return Span{value[0].get<int>(), value[1].get<int>()};
}

RelationInstance instance_from_json(const json& obj) {
  if (!obj.is_object()) throw DataError("expected a JSON object");
  for (const char* key : {"id", "lang", "tokens", "subj_span", "obj_span", "label"}) {
    if (!obj.contains(key)) throw DataError(std::string("missing key '") + key + "'");
  }
  RelationInstance inst;
  inst.id = obj.at("id").get<std::string>();
  inst.lang = obj.at("lang").get<std::string>();
  inst.tokens = obj.at("tokens").get<std::vector<std::string>>();
  inst.subj = span_from_json(obj.at("subj_span"), "subj_span");
  inst.obj = span_from_json(obj.at("obj_span"), "obj_span");
  inst.label = obj.at("label").get<std::string>();
  if (auto it = obj.find("label_only"); it != obj.end()) inst.label_only = it->get<bool>();
  return inst;
}

std::string check_span(const RelationInstance& inst, Span span, bool label_only) {
  if (label_only && span.start == 0 && span.end == 0) return {};
  const int n = static_cast<int>(inst.tokens.size());
  if (span.start < 0 || span.end > n || span.start > span.end) return "span out of bounds";
  if (span.empty()) return "empty span";
  return {};
}

}  // namespace

std::vector<std::string> RelationInstance::subj_tokens() const { return slice(tokens, subj); }
std::vector<std::string> RelationInstance::obj_tokens() const { return slice(tokens, obj); }
std::string RelationInstance::subj_text() const { return join(subj_tokens()); }
std::string RelationInstance::obj_text() const { return join(obj_tokens()); }

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw DataError("duplicate label '" + labels_[i] + "' in label space");
    }
  }
}

bool LabelSpace::contains(std::string_view label) const { return find(label).has_value(); }

std::optional<std::size_t> LabelSpace::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelSpace::index_of(std::string_view label) const {
  auto found = find(label);
  if (!found) throw DataError("unknown label '" + std::string(label) + "'");
  return *found;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "test";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "dev") return Split::kDev;
  if (text == "test") return Split::kTest;
  return std::nullopt;
}

std::optional<std::string> check_instance(const RelationInstance& inst,
                                          const LabelSpace* label_space) {
  if (auto msg = check_span(inst, inst.subj, inst.label_only); !msg.empty()) {
    return "subj_span: " + msg;
  }
  if (auto msg = check_span(inst, inst.obj, inst.label_only); !msg.empty()) {
    return "obj_span: " + msg;
  }
  if (inst.label_only && (!inst.subj.empty() || !inst.obj.empty())) {
    return "label_only instance must carry sentinel spans [0,0)";
  }
  if (label_space && !label_space->contains(inst.label)) {
    return "label '" + inst.label + "' not in label space";
  }
  return std::nullopt;
}

Dataset parse_jsonl(std::istream& in, std::string_view source,
                    const std::optional<LabelSpace>& label_space) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    RelationInstance inst;
    try {
      inst = instance_from_json(json::parse(line));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": malformed line: " << e.what();
      throw DataError(msg.str());
    }
    if (auto problem = check_instance(inst, label_space ? &*label_space : nullptr)) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": instance '" << inst.id << "': " << *problem;
      throw DataError(msg.str());
    }
    if (ds.instances.empty()) {
      ds.lang = inst.lang;
    } else if (inst.lang != ds.lang) {
      std::ostringstream msg;
      msg << source << ":" << line_no << ": instance '" << inst.id << "' has lang '"
          << inst.lang << "' but the dataset is '" << ds.lang << "'";
      throw DataError(msg.str());
    }
    ds.instances.push_back(std::move(inst));
  }
  if (label_space) {
    ds.label_space = *label_space;
  } else {
    std::set<std::string> observed;
    for (const auto& inst : ds.instances) observed.insert(inst.label);
    ds.label_space = LabelSpace({observed.begin(), observed.end()});
  }
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path,
                   const std::optional<LabelSpace>& label_space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  Dataset ds = parse_jsonl(in, path.string(), label_space);
  const auto stem = path.stem().string();
  ds.split = parse_split(stem).value_or(Split::kTest);
  ds.name = path.has_parent_path() ? path.parent_path().filename().string() : std::string();
  if (ds.name.empty() || ds.name == ".") ds.name = stem;
  return ds;
}

std::string to_json_line(const RelationInstance& inst) {
  ordered_json obj;
  obj["id"] = inst.id;
  obj["lang"] = inst.lang;
  obj["tokens"] = inst.tokens;
  obj["subj_span"] = {inst.subj.start, inst.subj.end};
  obj["obj_span"] = {inst.obj.start, inst.obj.end};
  obj["label"] = inst.label;
  if (inst.label_only) obj["label_only"] = true;
  return obj.dump();
}

RelationInstance instance_from_json_line(std::string_view line) {
  return instance_from_json(json::parse(line));
}

std::string to_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& inst : dataset.instances) {
    out += to_json_line(inst);
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << to_jsonl(dataset);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<Violation> validate(const Dataset& dataset) {
  std::vector<Violation> out;
  std::set<std::string> seen_ids;
  using PairKey = std::tuple<std::vector<std::string>, int, int, int, int>;
  std::map<PairKey, std::string> pair_labels;
  for (const auto& inst : dataset.instances) {
    if (!seen_ids.insert(inst.id).second) {
      out.push_back({inst.id, "duplicate id '" + inst.id + "'"});
    }
    if (inst.lang != dataset.lang) {
      out.push_back({inst.id, "lang '" + inst.lang + "' differs from dataset lang '" +
                                  dataset.lang + "'"});
    }
    if (auto problem = check_instance(inst, &dataset.label_space)) {
      out.push_back({inst.id, *problem});
      continue;
    }
    if (inst.label_only) continue;
    PairKey key{inst.tokens, inst.subj.start, inst.subj.end, inst.obj.start, inst.obj.end};
    auto [it, inserted] = pair_labels.emplace(std::move(key), inst.label);
    if (!inserted && it->second != inst.label) {
      out.push_back({inst.id, "conflicting labels '" + it->second + "' and '" + inst.label +
                                  "' for the same sentence and entity pair"});
    }
  }
  return out;
}

std::map<SplitKey, std::size_t> split_counts(std::span<const Dataset> datasets) {
  std::map<SplitKey, std::size_t> table;
  for (const auto& ds : datasets) table[{ds.name, ds.lang, ds.split}] += ds.size();
  return table;
}

std::vector<Dataset> load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("not a directory: '" + dir.string() + "'");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Dataset> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_jsonl(f));
  return out;
}

}  // namespace pxre
