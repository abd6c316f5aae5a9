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

#include "pxre/vocab.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "pxre/error.hpp"

namespace pxre {
namespace {

bool droppable(TokenRole role, int pass) {
  if (pass == 0) return role == TokenRole::kSentence;
  return role == TokenRole::kLiteral;
}

EncodedSide truncate_and_encode(const Vocab& vocab, std::span<const std::string> tokens,
                                std::span<const TokenRole> roles, std::size_t max_len) {
  const std::size_t n = tokens.size();
  std::vector<bool> keep(n, true);
  std::size_t excess = n > max_len ? n - max_len : 0;

  for (int pass = 0; pass < 2 && excess > 0; ++pass) {
    // Group droppable tokens by the contiguous run they belong to; within a
    // run, tokens closest to the run centre go first.
    std::vector<std::pair<double, std::size_t>> order;
    std::size_t i = 0;
    while (i < n) {
      if (!droppable(roles[i], pass) &&
          !(pass == 0 && roles[i] == TokenRole::kSentenceEntity)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      const bool sentence_run = pass == 0;
      while (j < n && (droppable(roles[j], pass) ||
                       (sentence_run && roles[j] == TokenRole::kSentenceEntity))) {
        ++j;
      }
      const double centre = 0.5 * static_cast<double>(i + j - 1);
      for (std::size_t k = i; k < j; ++k) {
        if (droppable(roles[k], pass)) {
          order.emplace_back(std::abs(static_cast<double>(k) - centre), k);
        }
      }
      i = j;
    }
    std::stable_sort(order.begin(), order.end());
    for (const auto& [dist, idx] : order) {
      if (excess == 0) break;
      keep[idx] = false;
      --excess;
    }
  }
  if (excess > 0) {
    throw ModelError("max_len " + std::to_string(max_len) +
                     " cannot hold the protected tokens of a " + std::to_string(n) +
                     "-token sequence");
  }

  EncodedSide out;
  out.ids.reserve(std::min(n, max_len));
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    if (roles[i] == TokenRole::kMask) out.mask_positions.push_back(static_cast<int>(out.ids.size()));
    out.ids.push_back(vocab.id(tokens[i]));
  }
  return out;
}

}  // namespace

std::vector<std::string> reserved_tokens(const LanguageRegistry& languages) {
  std::vector<std::string> out = {"<pad>", std::string(kBosToken), std::string(kEosToken),
                                  "<unk>", std::string(kMaskToken)};
  for (const auto& code : languages.codes()) out.push_back(LanguageRegistry::id_token(code));
  return out;
}

Vocab::Vocab(LanguageRegistry languages) : languages_(std::move(languages)) {
  for (auto& t : reserved_tokens(languages_)) {
    if (index_.contains(t)) throw ConfigError("duplicate language id token " + t);
    add(t);
  }
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens, LanguageRegistry languages) {
  Vocab vocab(std::move(languages));
  const auto reserved = reserved_tokens(vocab.languages_);
  if (tokens.size() < reserved.size() ||
      !std::equal(reserved.begin(), reserved.end(), tokens.begin())) {
    throw ModelError("vocabulary does not start with the reserved token block");
  }
  for (std::size_t i = reserved.size(); i < tokens.size(); ++i) {
    if (vocab.index_.contains(tokens[i])) throw ModelError("duplicate vocabulary token '" + tokens[i] + "'");
    vocab.add(tokens[i]);
  }
  return vocab;
}

int Vocab::add(std::string_view token) {
  auto [it, inserted] = index_.emplace(std::string(token), size());
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

void Vocab::add_all(std::span<const std::string> tokens) {
  for (const auto& t : tokens) add(t);
}

std::optional<int> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocab::id(std::string_view token) const { return find(token).value_or(kUnk); }

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw ModelError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocab::lang_id(std::string_view code) const {
  if (!languages_.contains(code)) {
    throw ConfigError("unknown language '" + std::string(code) +
                      "' (registered: " + languages_.listing() + ")");
  }
  return index_.at(LanguageRegistry::id_token(code));
}

std::vector<int> encode_tokens(const Vocab& vocab, std::span<const std::string> tokens,
                               std::size_t max_len) {
  std::vector<TokenRole> roles(tokens.size(), TokenRole::kSentence);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (auto id = vocab.find(tokens[i]); id && vocab.is_reserved(*id)) {
      roles[i] = *id == Vocab::kMask ? TokenRole::kMask : TokenRole::kFraming;
    }
  }
  return truncate_and_encode(vocab, tokens, roles, max_len).ids;
}

EncodedSide encode_side(const Vocab& vocab, const RenderedSide& side, std::size_t max_len) {
  if (side.roles.size() != side.tokens.size()) {
    throw ModelError("rendered side has mismatched token and role counts");
  }
  return truncate_and_encode(vocab, side.tokens, side.roles, max_len);
}

EncodedPair encode_pair(const Vocab& vocab, const RenderedPair& pair, std::size_t max_len) {
  return {encode_side(vocab, pair.enc, max_len), encode_side(vocab, pair.dec, max_len)};
}

}  // namespace pxre
