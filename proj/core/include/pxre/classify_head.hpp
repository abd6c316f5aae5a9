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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pxre/autograd.hpp"
#include "pxre/backbone.hpp"
#include "pxre/prompt_templates.hpp"
#include "pxre/relation_data.hpp"

namespace pxre {

/// Which decoder positions form the single vector fed to the head.
enum class Pooling { kLastToken, kMean, kMaskPosition };
/// Linear head over label ids, or label-word readout at a decoder [MASK].
enum class HeadMode { kLinear, kVerbalizer };

std::string_view to_string(Pooling pooling);
std::string_view to_string(HeadMode mode);
/// Throw ConfigError on unknown names.
Pooling parse_pooling(std::string_view text);
HeadMode parse_head_mode(std::string_view text);

/// Rejects pooling/head combinations the template cannot support, e.g.
/// mask_position pooling or verbalizer mode with no decoder [MASK].
void check_head_compatibility(const PromptTemplate& tpl, Pooling pooling, HeadMode mode);

/// p(y|x) = softmax(W v + b) with W of shape (|Y|, d_model).
class ClassifierHead {
 public:
  ClassifierHead() = default;
  ClassifierHead(int num_labels, int d_model, Pooling pooling, Rng& rng, double init_std = 0.05);

  int num_labels() const { return static_cast<int>(weight.value.rows()); }
  int d_model() const { return static_cast<int>(weight.value.cols()); }

  /// (rows, |Y|) logits for pooled (rows, d_model) vectors.
  nn::Var logits(nn::Tape& tape, nn::Var pooled);
  std::vector<double> logits(const nn::RowVector& pooled) const;

  std::vector<nn::Parameter*> parameters() { return {&weight, &bias}; }

  nn::Parameter weight;
  nn::Parameter bias;
  Pooling pooling = Pooling::kLastToken;
};

/// Row weights (1 x decoder length) that implement a pooling mode; pooled
/// = weights * v_dec. Throws ModelError when no position qualifies.
nn::RowVector pooling_weights(const std::vector<bool>& dec_pad_mask, Pooling pooling,
                              std::span<const int> mask_positions);

nn::RowVector pool(const BackboneStates& states, Pooling pooling,
                   std::span<const int> mask_positions);
nn::Var pool(nn::Tape& tape, nn::Var v_dec, const std::vector<bool>& dec_pad_mask,
             Pooling pooling, std::span<const int> mask_positions);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);
/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

std::vector<double> predict_distribution(const ClassifierHead& head, const nn::RowVector& pooled);
double nll_loss(const ClassifierHead& head, const nn::RowVector& pooled, std::size_t gold);

/// Verbalizer label words resolved to vocabulary ids, in label-space order.
class VerbalizerIds {
 public:
  VerbalizerIds() = default;
  /// Throws ConfigError when a label has no word or a word is not a
  /// single vocabulary token.
  VerbalizerIds(const Verbalizer& verbalizer, const LabelSpace& labels, const Vocab& vocab);

  const std::vector<int>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

 private:
  std::vector<int> ids_;
};

/// Restricts a vocabulary distribution to the label-word ids and
/// renormalizes.
std::vector<double> restrict_distribution(std::span<const double> vocab_probs,
                                          std::span<const int> label_word_ids);

/// p(y|x) = p(MP(y)|x_prompt): the model's vocabulary distribution at the
/// decoder position `mask_position`, restricted to the label words.
std::vector<double> verbalizer_distribution(Backbone& model, const VerbalizerIds& verbalizer,
                                            const BackboneStates& states, int mask_position);

}  // namespace pxre
