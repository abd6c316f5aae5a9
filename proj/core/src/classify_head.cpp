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

#include "pxre/classify_head.hpp"

#include <algorithm>
#include <cmath>

#include "pxre/error.hpp"

namespace pxre {

std::string_view to_string(Pooling pooling) {
  switch (pooling) {
    case Pooling::kLastToken: return "last_token";
    case Pooling::kMean: return "mean";
    case Pooling::kMaskPosition: return "mask_position";
  }
  return "last_token";
}

std::string_view to_string(HeadMode mode) {
  return mode == HeadMode::kLinear ? "linear" : "verbalizer";
}

Pooling parse_pooling(std::string_view text) {
  if (text == "last_token") return Pooling::kLastToken;
  if (text == "mean") return Pooling::kMean;
  if (text == "mask_position") return Pooling::kMaskPosition;
  throw ConfigError("unknown pooling '" + std::string(text) +
                    "' (expected last_token, mean, mask_position)");
}

HeadMode parse_head_mode(std::string_view text) {
  if (text == "linear") return HeadMode::kLinear;
  if (text == "verbalizer") return HeadMode::kVerbalizer;
  throw ConfigError("unknown head_mode '" + std::string(text) + "' (expected linear, verbalizer)");
}

void check_head_compatibility(const PromptTemplate& tpl, Pooling pooling, HeadMode mode) {
  if (tpl.decoder_has_mask()) return;
  if (pooling == Pooling::kMaskPosition) {
    throw ConfigError("mask_position pooling needs a decoder [MASK], but template '" + tpl.name +
                      "' has none");
  }
  if (mode == HeadMode::kVerbalizer) {
    throw ConfigError("verbalizer head needs a decoder [MASK], but template '" + tpl.name +
                      "' has none");
  }
}

ClassifierHead::ClassifierHead(int num_labels, int d_model, Pooling pool_mode, Rng& rng,
                               double init_std)
    : weight(nn::normal_parameter("head.weight", num_labels, d_model, init_std, rng)),
      bias(nn::constant_parameter("head.bias", 1, num_labels, 0.0)),
      pooling(pool_mode) {
  if (num_labels <= 0) throw ConfigError("classifier head needs at least one label");
}

nn::Var ClassifierHead::logits(nn::Tape& tape, nn::Var pooled) {
  return tape.add_row(tape.matmul_nt(pooled, tape.param(weight)), tape.param(bias));
}

std::vector<double> ClassifierHead::logits(const nn::RowVector& pooled) const {
  if (pooled.size() != weight.value.cols()) {
    throw ModelError("pooled vector has width " + std::to_string(pooled.size()) +
                     ", head expects " + std::to_string(weight.value.cols()));
  }
  const Eigen::VectorXd z = weight.value * pooled.transpose() + bias.value.row(0).transpose();
  return {z.data(), z.data() + z.size()};
}

nn::RowVector pooling_weights(const std::vector<bool>& dec_pad_mask, Pooling pooling,
                              std::span<const int> mask_positions) {
  const auto n = static_cast<Eigen::Index>(dec_pad_mask.size());
  nn::RowVector w = nn::RowVector::Zero(n);
  switch (pooling) {
    case Pooling::kLastToken: {
      for (Eigen::Index i = n; i-- > 0;) {
        if (dec_pad_mask[static_cast<std::size_t>(i)]) {
          w(i) = 1.0;
          return w;
        }
      }
      throw ModelError("last_token pooling: decoder has no real position");
    }
    case Pooling::kMean: {
      const auto real = std::count(dec_pad_mask.begin(), dec_pad_mask.end(), true);
      if (real == 0) throw ModelError("mean pooling: decoder has no real position");
      for (Eigen::Index i = 0; i < n; ++i) {
        if (dec_pad_mask[static_cast<std::size_t>(i)]) w(i) = 1.0 / static_cast<double>(real);
      }
      return w;
    }
    case Pooling::kMaskPosition: {
      if (mask_positions.empty()) throw ModelError("mask_position pooling: no decoder [MASK]");
      for (int p : mask_positions) {
        if (p < 0 || p >= n) throw ModelError("mask position out of range");
        w(p) += 1.0 / static_cast<double>(mask_positions.size());
      }
      return w;
    }
  }
  return w;
}

nn::RowVector pool(const BackboneStates& states, Pooling pooling,
                   std::span<const int> mask_positions) {
  if (static_cast<Eigen::Index>(states.dec_pad_mask.size()) != states.v_dec.rows()) {
    throw ModelError("decoder pad mask length differs from decoder length");
  }
  return pooling_weights(states.dec_pad_mask, pooling, mask_positions) * states.v_dec;
}

nn::Var pool(nn::Tape& tape, nn::Var v_dec, const std::vector<bool>& dec_pad_mask,
             Pooling pooling, std::span<const int> mask_positions) {
  nn::Matrix w = pooling_weights(dec_pad_mask, pooling, mask_positions);
  return tape.matmul(tape.constant(std::move(w)), v_dec);
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> predict_distribution(const ClassifierHead& head, const nn::RowVector& pooled) {
  return softmax(head.logits(pooled));
}

double nll_loss(const ClassifierHead& head, const nn::RowVector& pooled, std::size_t gold) {
  const auto z = head.logits(pooled);
  if (gold >= z.size()) throw ModelError("gold label index out of range");
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return -(z[gold] - m - std::log(sum));
}

VerbalizerIds::VerbalizerIds(const Verbalizer& verbalizer, const LabelSpace& labels,
                             const Vocab& vocab) {
  for (const auto& label : labels.labels()) {
    const auto& word = verbalizer.word(label);
    auto id = vocab.find(word);
    if (!id) throw ConfigError("label word '" + word + "' for '" + label + "' is not in the vocabulary");
    if (vocab.is_reserved(*id)) throw ConfigError("label word '" + word + "' is a reserved token");
    ids_.push_back(*id);
  }
}

std::vector<double> restrict_distribution(std::span<const double> vocab_probs,
                                          std::span<const int> label_word_ids) {
  std::vector<double> out;
  out.reserve(label_word_ids.size());
  double sum = 0.0;
  for (int id : label_word_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_probs.size()) {
      throw ModelError("label word id out of range");
    }
    out.push_back(vocab_probs[static_cast<std::size_t>(id)]);
    sum += out.back();
  }
  if (!(sum > 0.0)) throw ModelError("label words carry zero probability mass");
  for (auto& p : out) p /= sum;
  return out;
}

std::vector<double> verbalizer_distribution(Backbone& model, const VerbalizerIds& verbalizer,
                                            const BackboneStates& states, int mask_position) {
  if (mask_position < 0 || mask_position >= states.v_dec.rows()) {
    throw ModelError("verbalizer mask position out of range");
  }
  nn::Tape tape(false);
  nn::Var state = tape.constant(states.v_dec.row(mask_position));
  const nn::Matrix& z = model.vocab_logits(tape, state).value();
  const auto probs = softmax(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
  return restrict_distribution(probs, verbalizer.ids());
}

}  // namespace pxre
