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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pxre/languages.hpp"
#include "pxre/prompt_templates.hpp"

namespace pxre {

/// Token <-> id bijection. Ids 0..4 are <pad>, <s>, </s>, <unk>, [MASK];
/// one id token per registered language follows, then corpus tokens.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kMask = 4;
  static constexpr int kNumSpecial = 5;

  explicit Vocab(LanguageRegistry languages = LanguageRegistry());

  /// Rebuilds a vocabulary from its full token list (reserved prefix
  /// included), as stored in checkpoints. Throws ModelError when the
  /// reserved prefix does not match the languages.
  static Vocab from_tokens(std::vector<std::string> tokens, LanguageRegistry languages);

  /// Adds a token if absent; returns its id either way.
  int add(std::string_view token);
  void add_all(std::span<const std::string> tokens);

  std::optional<int> find(std::string_view token) const;
  /// Out-of-vocabulary tokens map to <unk>.
  int id(std::string_view token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  /// Throws ConfigError listing the registered languages.
  int lang_id(std::string_view code) const;
  bool is_reserved(int id) const { return id >= 0 && id < num_reserved(); }
  int num_reserved() const { return kNumSpecial + static_cast<int>(languages_.codes().size()); }

  const LanguageRegistry& languages() const { return languages_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  LanguageRegistry languages_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Token strings that a Vocab always reserves, in id order.
std::vector<std::string> reserved_tokens(const LanguageRegistry& languages);

struct EncodedSide {
  std::vector<int> ids;
  std::vector<int> mask_positions;
};

struct EncodedPair {
  EncodedSide enc;
  EncodedSide dec;
};

/// Maps tokens to ids, truncating to max_len. Without roles every
/// non-reserved token counts as sentence text. Truncation removes
/// sentence-slot tokens nearest the middle of their slot first and never
/// removes entity tokens, [MASK], framing, or language ids; it throws
/// ModelError when max_len cannot hold the protected tokens.
std::vector<int> encode_tokens(const Vocab& vocab, std::span<const std::string> tokens,
                               std::size_t max_len);

EncodedSide encode_side(const Vocab& vocab, const RenderedSide& side, std::size_t max_len);
EncodedPair encode_pair(const Vocab& vocab, const RenderedPair& pair, std::size_t max_len);

}  // namespace pxre
