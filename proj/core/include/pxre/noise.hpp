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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxre/autograd.hpp"
#include "pxre/backbone.hpp"

namespace pxre {

struct NoiseOptions {
  double mask_ratio = 0.35;
  double span_mean = 3.5;
  bool permute_sentences = true;
};

struct NoiseResult {
  std::vector<std::string> tokens;
  std::size_t masked_tokens = 0;   // original tokens covered by spans
  std::size_t maskable_tokens = 0; // tokens eligible for masking
  std::vector<int> span_lengths;   // one entry per [MASK] emitted
  std::size_t sentences = 0;
};

/// True for <s>, </s>, <pad>, <unk>, [MASK] and "[XX]" language ids.
bool is_reserved_token(std::string_view token);
bool is_sentence_terminal(std::string_view token);

/// Denoising noise function: optional sentence permutation followed by
/// Poisson span masking, each span collapsed into one [MASK] token.
/// Reserved tokens are never masked. Deterministic for a given seed.
NoiseResult apply_noise(std::span<const std::string> tokens, std::uint64_t seed,
                        const NoiseOptions& options = {});

struct MonolingualSentence {
  std::string lang;
  std::vector<std::string> tokens;
};

/// One reconstruction example: the encoder reads the noised text followed
/// by </s> and the language id; the decoder starts from the language id and
/// is teacher-forced on the original tokens, so targets has exactly the
/// original length.
struct DenoisingExample {
  std::vector<int> enc_ids;
  std::vector<int> dec_ids;
  std::vector<int> targets;
};

DenoisingExample make_denoising_example(const Vocab& vocab, const MonolingualSentence& sentence,
                                        std::uint64_t seed, int max_len,
                                        const NoiseOptions& options = {});

/// Sum over languages of the mean token-level NLL of reconstructing each
/// sentence from its noised version. Throws ModelError on an empty batch.
nn::Var denoising_loss(nn::Tape& tape, Backbone& model,
                       std::span<const MonolingualSentence> batch, std::uint64_t seed,
                       const NoiseOptions& options = {}, Rng* dropout_rng = nullptr);

/// Computes denoising_loss, back-propagates and applies one optimizer
/// update. Returns the loss before the update.
double denoising_step(Backbone& model, nn::Adam& optimizer,
                      std::span<const MonolingualSentence> batch, std::uint64_t seed,
                      const NoiseOptions& options = {});

/// Reads every *.txt in a directory (one whitespace-tokenized sentence per
/// line, language = file stem) into monolingual sentences.
std::vector<MonolingualSentence> load_monolingual_corpus(const std::string& dir);

}  // namespace pxre
