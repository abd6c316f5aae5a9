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

#include "pxre/noise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pxre/error.hpp"

namespace pxre {
namespace {

int draw_span_length(Rng& rng, double mean) {
  int len = 0;
  while (len == 0) len = rng.poisson(mean);
  return len;
}

std::vector<std::string> permute_sentences(std::span<const std::string> tokens, Rng& rng,
                                           std::size_t& sentence_count) {
  std::vector<std::vector<std::string>> sentences(1);
  for (const auto& t : tokens) {
    sentences.back().push_back(t);
    if (is_sentence_terminal(t)) sentences.emplace_back();
  }
  if (sentences.back().empty()) sentences.pop_back();
  sentence_count = sentences.size();
  if (sentences.size() > 1) rng.shuffle(sentences);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto& s : sentences) {
    for (auto& t : s) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

bool is_reserved_token(std::string_view token) {
  if (token == "<s>" || token == "</s>" || token == "<pad>" || token == "<unk>" ||
      token == "[MASK]") {
    return true;
  }
  if (token.size() >= 4 && token.front() == '[' && token.back() == ']') {
    return std::all_of(token.begin() + 1, token.end() - 1,
                       [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
  }
  return false;
}

bool is_sentence_terminal(std::string_view token) {
  return token == "." || token == "!" || token == "?" || token == "\xE3\x80\x82" /* 。 */ ||
         token == "\xEF\xBC\x81" /* ！ */ || token == "\xEF\xBC\x9F" /* ？ */;
}

NoiseResult apply_noise(std::span<const std::string> tokens, std::uint64_t seed,
                        const NoiseOptions& options) {
  NoiseResult result;
  Rng rng(seed);
  std::vector<std::string> source =
      options.permute_sentences ? permute_sentences(tokens, rng, result.sentences)
                                : std::vector<std::string>(tokens.begin(), tokens.end());

  const std::size_t n = source.size();
  std::vector<bool> maskable(n);
  for (std::size_t i = 0; i < n; ++i) maskable[i] = !is_reserved_token(source[i]);
  result.maskable_tokens = static_cast<std::size_t>(std::count(maskable.begin(), maskable.end(), true));
  const auto budget = static_cast<std::size_t>(
      std::llround(options.mask_ratio * static_cast<double>(result.maskable_tokens)));

  std::vector<int> span_at(n, 0);  // span length starting at i, 0 if none
  std::vector<bool> masked(n, false);
  std::size_t covered = 0;
  while (covered < budget) {
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < n; ++i) {
      if (maskable[i] && !masked[i]) starts.push_back(i);
    }
    if (starts.empty()) break;
    rng.shuffle(starts);
    const std::size_t before = covered;
    for (std::size_t start : starts) {
      if (covered >= budget) break;
      if (masked[start]) continue;
      auto len = static_cast<std::size_t>(draw_span_length(rng, options.span_mean));
      len = std::min(len, budget - covered);
      bool fits = start + len <= n;
      for (std::size_t k = start; fits && k < start + len; ++k) fits = maskable[k] && !masked[k];
      if (!fits) continue;
      for (std::size_t k = start; k < start + len; ++k) masked[k] = true;
      span_at[start] = static_cast<int>(len);
      covered += len;
    }
    if (covered == before) break;
  }

  result.masked_tokens = covered;
  result.tokens.reserve(n - covered + result.span_lengths.size());
  for (std::size_t i = 0; i < n;) {
    if (span_at[i] > 0) {
      result.tokens.emplace_back("[MASK]");
      result.span_lengths.push_back(span_at[i]);
      i += static_cast<std::size_t>(span_at[i]);
    } else {
      result.tokens.push_back(std::move(source[i]));
      ++i;
    }
  }
  return result;
}

DenoisingExample make_denoising_example(const Vocab& vocab, const MonolingualSentence& sentence,
                                        std::uint64_t seed, int max_len,
                                        const NoiseOptions& options) {
  if (sentence.tokens.empty()) throw ModelError("denoising sentence is empty");
  const auto cap = static_cast<std::size_t>(std::max(1, max_len - 2));
  std::vector<std::string> original(sentence.tokens.begin(),
                                    sentence.tokens.begin() +
                                        static_cast<long>(std::min(cap, sentence.tokens.size())));
  const int lang = vocab.lang_id(sentence.lang);
  auto noised = apply_noise(original, seed, options);

  DenoisingExample ex;
  for (const auto& t : noised.tokens) ex.enc_ids.push_back(vocab.id(t));
  ex.enc_ids.push_back(Vocab::kEos);
  ex.enc_ids.push_back(lang);
  ex.dec_ids.push_back(lang);
  for (std::size_t i = 0; i + 1 < original.size(); ++i) ex.dec_ids.push_back(vocab.id(original[i]));
  for (const auto& t : original) ex.targets.push_back(vocab.id(t));
  return ex;
}

nn::Var denoising_loss(nn::Tape& tape, Backbone& model,
                       std::span<const MonolingualSentence> batch, std::uint64_t seed,
                       const NoiseOptions& options, Rng* dropout_rng) {
  if (batch.empty()) throw ModelError("denoising step needs a non-empty batch");
  Rng seeds(seed);
  std::map<std::string, std::size_t> lang_tokens;
  std::vector<DenoisingExample> examples;
  for (const auto& s : batch) {
    examples.push_back(make_denoising_example(model.vocab(), s, seeds.fork(), model.max_len(), options));
    lang_tokens[s.lang] += examples.back().targets.size();
  }
  const ForwardMode mode = dropout_rng ? ForwardMode::kTrain : ForwardMode::kEval;
  std::vector<nn::Var> losses;
  std::vector<double> weights;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    auto graph = model.forward(tape, ex.enc_ids, ex.dec_ids, mode, dropout_rng);
    losses.push_back(tape.cross_entropy(model.vocab_logits(tape, graph.v_dec), ex.targets));
    weights.push_back(static_cast<double>(ex.targets.size()) /
                      static_cast<double>(lang_tokens[batch[i].lang]));
  }
  return tape.weighted_sum(losses, weights);
}

double denoising_step(Backbone& model, nn::Adam& optimizer,
                      std::span<const MonolingualSentence> batch, std::uint64_t seed,
                      const NoiseOptions& options) {
  Rng dropout_rng(seed ^ 0xd1b54a32d192ed03ULL);
  nn::Tape tape;
  optimizer.zero_grad();
  auto loss = denoising_loss(tape, model, batch, seed, options, &dropout_rng);
  const double value = loss.value()(0, 0);
  if (!std::isfinite(value)) throw ModelError("non-finite denoising loss");
  tape.backward(loss);
  optimizer.step();
  return value;
}

std::vector<MonolingualSentence> load_monolingual_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("corpus directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<MonolingualSentence> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw IoError("cannot read '" + f.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream words(line);
      MonolingualSentence s{f.stem().string(), {}};
      for (std::string w; words >> w;) s.tokens.push_back(w);
      if (!s.tokens.empty()) out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace pxre
