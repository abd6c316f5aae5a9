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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxre/languages.hpp"
#include "pxre/relation_data.hpp"

namespace pxre {

inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::string_view kMaskToken = "[MASK]";

enum class TemplateFamily { kNone, kSoft, kHard, kHardSoft };

std::string_view to_string(TemplateFamily family);

enum class SlotKind { kBos, kEos, kMask, kSent, kEnt1, kEnt2, kLiteral };

struct Slot {
  SlotKind kind = SlotKind::kLiteral;
  std::string text;  // literal word; empty for every other kind

  bool operator==(const Slot&) const = default;
};

/// A template t(.): encoder and decoder slot sequences.
struct PromptTemplate {
  std::string name;
  TemplateFamily family = TemplateFamily::kNone;
  std::vector<Slot> enc;
  std::vector<Slot> dec;

  /// Canonical spec strings, one space between symbols.
  std::string enc_spec() const;
  std::string dec_spec() const;

  bool references_entities() const;
  bool decoder_has_mask() const;

  /// Same slots and family, ignoring the name.
  bool same_structure(const PromptTemplate& other) const {
    return family == other.family && enc == other.enc && dec == other.dec;
  }
};

/// Provenance of every rendered token; truncation relies on it.
enum class TokenRole {
  kFraming,
  kMask,
  kLiteral,
  kSentence,
  kSentenceEntity,  // sentence-slot token that lies inside an entity span
  kEntity,
  kLangId,
};

struct RenderedSide {
  std::vector<std::string> tokens;
  std::vector<TokenRole> roles;
  std::vector<int> mask_positions;

  std::string joined() const;
};

struct RenderedPair {
  RenderedSide enc;
  RenderedSide dec;
  std::string lang;  // set by wrap_language_ids
  bool wrapped = false;
};

/// Parses "<s> {SENT} [MASK] {ENT1} [MASK] {ENT2} </s>"-style slot
/// strings. Whitespace separates literals; slot symbols and double-quote
/// characters are split out even when glued to neighbouring text.
PromptTemplate parse_template_spec(std::string_view enc, std::string_view dec,
                                   std::string name);

/// Template file: line 1 = encoder spec, line 2 = decoder spec.
PromptTemplate load_template_file(const std::filesystem::path& path, std::string name);

class TemplateRegistry {
 public:
  void add(PromptTemplate tpl);
  bool contains(std::string_view name) const;
  /// Throws ConfigError naming the registered templates.
  const PromptTemplate& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// Prompt_1 .. Prompt_9 plus "none" (plain fine-tuning).
const TemplateRegistry& builtin_templates();

/// Resolves a builtin template name, or a path to a two-line template file.
PromptTemplate resolve_template(std::string_view name_or_path);

RenderedPair render(const PromptTemplate& tpl, const RelationInstance& instance);

/// Appends the language id after the encoder's final </s> and prepends it
/// before the decoder's initial <s>.
RenderedPair wrap_language_ids(RenderedPair pair, std::string_view lang,
                               const LanguageRegistry& languages = LanguageRegistry());

/// Injective mapping label -> single label word.
class Verbalizer {
 public:
  Verbalizer() = default;
  /// Throws ConfigError when two labels share a word.
  explicit Verbalizer(std::map<std::string, std::string> mapping);

  /// Every label maps to itself.
  static Verbalizer identity(const LabelSpace& labels);
  /// Two-column TSV: label<TAB>word.
  static Verbalizer load_tsv(const std::filesystem::path& path);

  const std::string& word(std::string_view label) const;
  const std::map<std::string, std::string>& mapping() const { return mapping_; }
  bool covers(const LabelSpace& labels) const;

 private:
  std::map<std::string, std::string> mapping_;
};

}  // namespace pxre
