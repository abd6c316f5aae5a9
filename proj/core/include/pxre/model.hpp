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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pxre/backbone.hpp"
#include "pxre/classify_head.hpp"
#include "pxre/prompt_templates.hpp"
#include "pxre/relation_data.hpp"

namespace pxre {

/// Which language id wraps an evaluation input: the data's own language,
/// or always the training source language.
enum class LangIdPolicy { kData, kSource };

std::string_view to_string(LangIdPolicy policy);
LangIdPolicy parse_lang_id_policy(std::string_view text);

/// An instance with its label stripped. Prediction paths only ever see
/// this type, so no target-side label can influence a prediction.
struct UnlabeledInstance {
  std::string id;
  std::string lang;
  std::vector<std::string> tokens;
  Span subj;
  Span obj;
  bool label_only = false;

  static UnlabeledInstance from(const RelationInstance& instance);
};

std::vector<UnlabeledInstance> strip_labels(const Dataset& dataset);

/// Everything that fixes how instances become model inputs and outputs.
struct ModelSpec {
  PromptTemplate prompt;
  HeadMode head_mode = HeadMode::kLinear;
  Pooling pooling = Pooling::kLastToken;
  std::string source_lang = "en";
  bool language_id_wrapping = true;
  LangIdPolicy lang_id_policy = LangIdPolicy::kData;
  LabelSpace labels;
  Verbalizer verbalizer;
  std::string model_name = "prompt";
  std::string config_fingerprint;
  /// Target-data directory recorded at training time; zero-shot runs fall
  /// back to it when no directory is given.
  std::string target_data;
};

/// Backbone + classification head + the input pipeline
/// render -> wrap_language_ids -> encode.
class RelationModel {
 public:
  /// Initializes a fresh head from head_seed. Throws ConfigError for
  /// incompatible template/pooling/head choices.
  RelationModel(std::unique_ptr<Backbone> backbone, ModelSpec spec, std::uint64_t head_seed);
  RelationModel(std::unique_ptr<Backbone> backbone, ModelSpec spec, ClassifierHead head);

  RelationModel(const RelationModel& other);
  RelationModel& operator=(const RelationModel& other);
  RelationModel(RelationModel&&) noexcept = default;
  RelationModel& operator=(RelationModel&&) noexcept = default;

  const ModelSpec& spec() const { return spec_; }
  /// Switches the evaluation language-id policy (an ablation knob).
  void set_lang_id_policy(LangIdPolicy policy) { spec_.lang_id_policy = policy; }
  Backbone& backbone() { return *backbone_; }
  const Backbone& backbone() const { return *backbone_; }
  ClassifierHead& head() { return head_; }
  const ClassifierHead& head() const { return head_; }

  /// Language whose id token wraps an input written in data_lang.
  std::string id_lang_for(std::string_view data_lang) const;

  EncodedPair prepare(const UnlabeledInstance& instance, std::string_view id_lang) const;

  /// (1, |Y|) label logits recorded on tape.
  nn::Var logits(nn::Tape& tape, const UnlabeledInstance& instance, std::string_view id_lang,
                 ForwardMode mode, Rng* rng);

  /// NLL of the gold label, recorded on tape.
  nn::Var loss(nn::Tape& tape, const RelationInstance& instance, ForwardMode mode, Rng* rng);

  /// Eval-mode p(y|x) over the label space.
  std::vector<double> distribution(const UnlabeledInstance& instance, std::string_view id_lang);

  std::vector<nn::Parameter*> parameters();

 private:
  void finish_init();
  nn::Var label_logits(nn::Tape& tape, const EncodedPair& encoded, ForwardMode mode, Rng* rng);

  std::unique_ptr<Backbone> backbone_;
  ModelSpec spec_;
  ClassifierHead head_;
  VerbalizerIds verbalizer_ids_;
};

}  // namespace pxre
