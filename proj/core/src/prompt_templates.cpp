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

#include "pxre/prompt_templates.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include "pxre/error.hpp"

namespace pxre {
namespace {

std::string slot_symbol(const Slot& slot) {
  switch (slot.kind) {
    case SlotKind::kBos: return std::string(kBosToken);
    case SlotKind::kEos: return std::string(kEosToken);
    case SlotKind::kMask: return std::string(kMaskToken);
    case SlotKind::kSent: return "{SENT}";
    case SlotKind::kEnt1: return "{ENT1}";
    case SlotKind::kEnt2: return "{ENT2}";
    case SlotKind::kLiteral: return slot.text;
  }
  return slot.text;
}

std::string spec_string(const std::vector<Slot>& slots) {
  std::string out;
  for (const auto& s : slots) {
    if (!out.empty()) out += ' ';
    out += slot_symbol(s);
  }
  return out;
}

std::optional<SlotKind> symbol_kind(std::string_view symbol) {
  if (symbol == kBosToken) return SlotKind::kBos;
  if (symbol == kEosToken) return SlotKind::kEos;
  if (symbol == kMaskToken) return SlotKind::kMask;
  if (symbol == "{SENT}") return SlotKind::kSent;
  if (symbol == "{ENT1}") return SlotKind::kEnt1;
  if (symbol == "{ENT2}") return SlotKind::kEnt2;
  return std::nullopt;
}

char closing_for(char open) {
  switch (open) {
    case '{': return '}';
    case '[': return ']';
    case '<': return '>';
    default: return '\0';
  }
}

std::vector<Slot> parse_side(std::string_view spec, std::string_view side,
                             std::string_view name) {
  std::vector<Slot> slots;
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) slots.push_back({SlotKind::kLiteral, std::move(literal)});
    literal.clear();
  };
  for (std::size_t i = 0; i < spec.size();) {
    const char c = spec[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      ++i;
      continue;
    }
    if (c == '"') {
      flush();
      slots.push_back({SlotKind::kLiteral, "\""});
      ++i;
      continue;
    }
    if (const char close = closing_for(c); close != '\0') {
      const auto end = spec.find(close, i + 1);
      const auto space = spec.find_first_of(" \t", i + 1);
      if (end != std::string_view::npos && (space == std::string_view::npos || space > end)) {
        const auto symbol = spec.substr(i, end - i + 1);
        const auto kind = symbol_kind(symbol);
        if (!kind) {
          throw TemplateError("template '" + std::string(name) + "' " + std::string(side) +
                              ": unknown slot symbol '" + std::string(symbol) + "'");
        }
        flush();
        slots.push_back({*kind, {}});
        i = end + 1;
        continue;
      }
    }
    literal.push_back(c);
    ++i;
  }
  flush();

  if (slots.size() < 2 || slots.front().kind != SlotKind::kBos ||
      slots.back().kind != SlotKind::kEos) {
    throw TemplateError("template '" + std::string(name) + "' " + std::string(side) +
                        ": spec must begin with <s> and end with </s>");
  }
  for (std::size_t i = 1; i + 1 < slots.size(); ++i) {
    if (slots[i].kind == SlotKind::kBos || slots[i].kind == SlotKind::kEos) {
      throw TemplateError("template '" + std::string(name) + "' " + std::string(side) +
                          ": <s> and </s> may only frame the sequence");
    }
  }
  return slots;
}

TemplateFamily infer_family(const PromptTemplate& tpl) {
  bool literal = false;
  bool mask = false;
  for (const auto* side : {&tpl.enc, &tpl.dec}) {
    for (const auto& s : *side) {
      literal |= s.kind == SlotKind::kLiteral;
      mask |= s.kind == SlotKind::kMask;
    }
  }
  if (literal && mask) return TemplateFamily::kHardSoft;
  if (literal) return TemplateFamily::kHard;
  if (mask) return TemplateFamily::kSoft;
  return TemplateFamily::kNone;
}

void emit(RenderedSide& side, std::string token, TokenRole role) {
  side.tokens.push_back(std::move(token));
  side.roles.push_back(role);
}

RenderedSide render_side(const std::vector<Slot>& slots, const RelationInstance& inst,
                         const PromptTemplate& tpl) {
  RenderedSide side;
  for (const auto& slot : slots) {
    const auto before = side.tokens.size();
    switch (slot.kind) {
      case SlotKind::kBos:
        emit(side, std::string(kBosToken), TokenRole::kFraming);
        break;
      case SlotKind::kEos:
        emit(side, std::string(kEosToken), TokenRole::kFraming);
        break;
      case SlotKind::kMask:
        side.mask_positions.push_back(static_cast<int>(side.tokens.size()));
        emit(side, std::string(kMaskToken), TokenRole::kMask);
        break;
      case SlotKind::kLiteral:
        emit(side, slot.text, TokenRole::kLiteral);
        break;
      case SlotKind::kSent:
        for (int i = 0; i < static_cast<int>(inst.tokens.size()); ++i) {
          const bool in_entity = (i >= inst.subj.start && i < inst.subj.end) ||
                                 (i >= inst.obj.start && i < inst.obj.end);
          emit(side, inst.tokens[i],
               in_entity ? TokenRole::kSentenceEntity : TokenRole::kSentence);
        }
        break;
      case SlotKind::kEnt1:
      case SlotKind::kEnt2:
        if (inst.label_only) {
          throw TemplateError("instance '" + inst.id + "' is label-only; template '" +
                              tpl.name + "' references entity slots");
        }
        for (auto& t : slot.kind == SlotKind::kEnt1 ? inst.subj_tokens() : inst.obj_tokens()) {
          emit(side, std::move(t), TokenRole::kEntity);
        }
        break;
    }
    if (side.tokens.size() == before) {
      throw TemplateError("internal: slot " + slot_symbol(slot) + " of template '" + tpl.name +
                          "' was not substituted for instance '" + inst.id + "'");
    }
  }
  return side;
}

TemplateRegistry make_builtins() {
  struct Row {
    const char* name;
    const char* enc;
    const char* dec;
  };
  static constexpr Row kRows[] = {
      {"none", "<s> {SENT} </s>", "<s> {SENT} </s>"},
      // Soft prompts.
      {"Prompt_1", "<s> {SENT} [MASK] {ENT1} [MASK] {ENT2} </s>", "<s> {SENT} </s>"},
      {"Prompt_2", "<s> {SENT} [MASK] {ENT1} [MASK] {ENT2} </s>", "<s> {ENT1} {ENT2} </s>"},
      {"Prompt_3", "<s> {SENT} [MASK] {ENT1} [MASK] {ENT2} </s>", "<s> {ENT1} [MASK] {ENT2} </s>"},
      {"Prompt_4", "<s> {SENT} [MASK] {ENT1} [MASK] {ENT2} </s>",
       "<s> {SENT} [MASK] {ENT1} [MASK] {ENT2} </s>"},
      // Hard prompts.
      {"Prompt_5", "<s> {SENT} </s>",
       "<s> What is the type of relationship between {ENT1} and {ENT2} </s>"},
      {"Prompt_6", "<s> The sentence of {SENT} includes {ENT1} and {ENT2} </s>",
       "<s> What is the type of relationship between {ENT1} and {ENT2} </s>"},
      // Hard-soft hybrids.
      {"Prompt_7", "<s> The sentence of {SENT} includes {ENT1} [MASK] {ENT2} </s>",
       "<s> The sentence of {SENT} includes {ENT1} [MASK] {ENT2} </s>"},
      {"Prompt_8", "<s> The sentence: \"{SENT}\" includes {ENT1} [MASK] {ENT2} </s>",
       "<s> {SENT} </s>"},
      {"Prompt_9", "<s> The sentence: \"{SENT}\" includes {ENT1} [MASK] {ENT2} </s>",
       "<s> {ENT1} [MASK] {ENT2} </s>"},
  };
  TemplateRegistry registry;
  for (const auto& row : kRows) registry.add(parse_template_spec(row.enc, row.dec, row.name));
  return registry;
}

}  // namespace

std::string_view to_string(TemplateFamily family) {
  switch (family) {
    case TemplateFamily::kNone: return "none";
    case TemplateFamily::kSoft: return "soft";
    case TemplateFamily::kHard: return "hard";
    case TemplateFamily::kHardSoft: return "hard_soft";
  }
  return "none";
}

std::string PromptTemplate::enc_spec() const { return spec_string(enc); }
std::string PromptTemplate::dec_spec() const { return spec_string(dec); }

bool PromptTemplate::references_entities() const {
  for (const auto* side : {&enc, &dec}) {
    for (const auto& s : *side) {
      if (s.kind == SlotKind::kEnt1 || s.kind == SlotKind::kEnt2) return true;
    }
  }
  return false;
}

bool PromptTemplate::decoder_has_mask() const {
  for (const auto& s : dec) {
    if (s.kind == SlotKind::kMask) return true;
  }
  return false;
}

std::string RenderedSide::joined() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

PromptTemplate parse_template_spec(std::string_view enc, std::string_view dec, std::string name) {
  PromptTemplate tpl;
  tpl.enc = parse_side(enc, "ENC", name);
  tpl.dec = parse_side(dec, "DEC", name);
  tpl.name = std::move(name);
  tpl.family = infer_family(tpl);
  return tpl;
}

PromptTemplate load_template_file(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template file '" + path.string() + "'");
  std::string enc;
  std::string dec;
  if (!std::getline(in, enc) || !std::getline(in, dec)) {
    throw TemplateError("template file '" + path.string() +
                        "' needs two lines (encoder spec, decoder spec)");
  }
  return parse_template_spec(enc, dec, std::move(name));
}

void TemplateRegistry::add(PromptTemplate tpl) {
  auto name = tpl.name;
  templates_.insert_or_assign(std::move(name), std::move(tpl));
}

bool TemplateRegistry::contains(std::string_view name) const {
  return templates_.find(name) != templates_.end();
}

const PromptTemplate& TemplateRegistry::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    std::string known;
    for (const auto& [n, _] : templates_) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown template '" + std::string(name) + "' (known: " + known + ")");
  }
  return it->second;
}

std::vector<std::string> TemplateRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : templates_) out.push_back(n);
  return out;
}

const TemplateRegistry& builtin_templates() {
  static const TemplateRegistry registry = make_builtins();
  return registry;
}

PromptTemplate resolve_template(std::string_view name_or_path) {
  const auto& builtins = builtin_templates();
  if (builtins.contains(name_or_path)) return builtins.get(name_or_path);
  const std::filesystem::path path(name_or_path);
  if (std::filesystem::is_regular_file(path)) return load_template_file(path, path.stem().string());
  return builtins.get(name_or_path);  // throws with the list of known names
}

RenderedPair render(const PromptTemplate& tpl, const RelationInstance& instance) {
  RenderedPair pair;
  pair.enc = render_side(tpl.enc, instance, tpl);
  pair.dec = render_side(tpl.dec, instance, tpl);
  return pair;
}

RenderedPair wrap_language_ids(RenderedPair pair, std::string_view lang,
                               const LanguageRegistry& languages) {
  if (pair.wrapped) throw TemplateError("rendered pair is already wrapped with language ids");
  if (!languages.contains(lang)) {
    throw ConfigError("unknown language '" + std::string(lang) +
                      "' (registered: " + languages.listing() + ")");
  }
  const auto id = LanguageRegistry::id_token(lang);
  pair.enc.tokens.push_back(id);
  pair.enc.roles.push_back(TokenRole::kLangId);
  pair.dec.tokens.insert(pair.dec.tokens.begin(), id);
  pair.dec.roles.insert(pair.dec.roles.begin(), TokenRole::kLangId);
  for (auto& p : pair.dec.mask_positions) ++p;
  pair.lang = std::string(lang);
  pair.wrapped = true;
  return pair;
}

Verbalizer::Verbalizer(std::map<std::string, std::string> mapping) : mapping_(std::move(mapping)) {
  std::map<std::string, std::string> owner;
  for (const auto& [label, word] : mapping_) {
    if (word.empty() || word.find_first_of(" \t") != std::string::npos) {
      throw ConfigError("label word for '" + label + "' must be a single token");
    }
    auto [it, inserted] = owner.emplace(word, label);
    if (!inserted) {
      throw ConfigError("verbalizer is not injective: '" + it->second + "' and '" + label +
                        "' both map to '" + word + "'");
    }
  }
}

Verbalizer Verbalizer::identity(const LabelSpace& labels) {
  std::map<std::string, std::string> mapping;
  for (const auto& l : labels.labels()) mapping.emplace(l, l);
  return Verbalizer(std::move(mapping));
}

Verbalizer Verbalizer::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open verbalizer '" + path.string() + "'");
  std::map<std::string, std::string> mapping;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected label<TAB>word");
    }
    mapping[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return Verbalizer(std::move(mapping));
}

const std::string& Verbalizer::word(std::string_view label) const {
  auto it = mapping_.find(std::string(label));
  if (it == mapping_.end()) throw ConfigError("verbalizer has no word for '" + std::string(label) + "'");
  return it->second;
}

bool Verbalizer::covers(const LabelSpace& labels) const {
  for (const auto& l : labels.labels()) {
    if (!mapping_.contains(l)) return false;
  }
  return true;
}

}  // namespace pxre
