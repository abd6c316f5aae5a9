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

#include "pxre/model.hpp"

#include "pxre/error.hpp"

namespace pxre {

std::string_view to_string(LangIdPolicy policy) {
  return policy == LangIdPolicy::kData ? "data" : "source";
}

LangIdPolicy parse_lang_id_policy(std::string_view text) {
  if (text == "data") return LangIdPolicy::kData;
  if (text == "source") return LangIdPolicy::kSource;
  throw ConfigError("unknown eval_lang_id '" + std::string(text) + "' (expected data, source)");
}

UnlabeledInstance UnlabeledInstance::from(const RelationInstance& instance) {
  return {instance.id, instance.lang, instance.tokens, instance.subj, instance.obj,
          instance.label_only};
}

std::vector<UnlabeledInstance> strip_labels(const Dataset& dataset) {
  std::vector<UnlabeledInstance> out;
  out.reserve(dataset.size());
  for (const auto& inst : dataset.instances) out.push_back(UnlabeledInstance::from(inst));
  return out;
}

RelationModel::RelationModel(std::unique_ptr<Backbone> backbone, ModelSpec spec,
                             std::uint64_t head_seed)
    : backbone_(std::move(backbone)), spec_(std::move(spec)) {
  if (!backbone_) throw ConfigError("relation model needs a backbone");
  Rng rng(head_seed);
  head_ = ClassifierHead(static_cast<int>(spec_.labels.size()), backbone_->d_model(),
                         spec_.pooling, rng);
  finish_init();
}

RelationModel::RelationModel(std::unique_ptr<Backbone> backbone, ModelSpec spec,
                             ClassifierHead head)
    : backbone_(std::move(backbone)), spec_(std::move(spec)), head_(std::move(head)) {
  if (!backbone_) throw ConfigError("relation model needs a backbone");
  if (head_.num_labels() != static_cast<int>(spec_.labels.size()) ||
      head_.d_model() != backbone_->d_model()) {
    throw ConfigError("classifier head shape does not match label space and backbone width");
  }
  finish_init();
}

void RelationModel::finish_init() {
  if (spec_.labels.empty()) throw ConfigError("relation model needs a non-empty label space");
  check_head_compatibility(spec_.prompt, spec_.pooling, spec_.head_mode);
  head_.pooling = spec_.pooling;
  if (spec_.head_mode == HeadMode::kVerbalizer) {
    verbalizer_ids_ = VerbalizerIds(spec_.verbalizer, spec_.labels, backbone_->vocab());
  }
  if (!backbone_->vocab().languages().contains(spec_.source_lang)) {
    throw ConfigError("source language '" + spec_.source_lang + "' is not registered (registered: " +
                      backbone_->vocab().languages().listing() + ")");
  }
}

RelationModel::RelationModel(const RelationModel& other)
    : backbone_(other.backbone_->clone()),
      spec_(other.spec_),
      head_(other.head_),
      verbalizer_ids_(other.verbalizer_ids_) {}

RelationModel& RelationModel::operator=(const RelationModel& other) {
  if (this != &other) {
    RelationModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::string RelationModel::id_lang_for(std::string_view data_lang) const {
  return spec_.lang_id_policy == LangIdPolicy::kSource ? spec_.source_lang
                                                       : std::string(data_lang);
}

EncodedPair RelationModel::prepare(const UnlabeledInstance& instance,
                                   std::string_view id_lang) const {
  RelationInstance view{instance.id, instance.lang, instance.tokens, instance.subj,
                        instance.obj, std::string(), instance.label_only};
  RenderedPair pair = render(spec_.prompt, view);
  if (spec_.language_id_wrapping) {
    pair = wrap_language_ids(std::move(pair), id_lang, backbone_->vocab().languages());
  }
  return encode_pair(backbone_->vocab(), pair, static_cast<std::size_t>(backbone_->max_len()));
}

nn::Var RelationModel::label_logits(nn::Tape& tape, const EncodedPair& encoded, ForwardMode mode,
                                    Rng* rng) {
  auto graph = backbone_->forward(tape, encoded.enc.ids, encoded.dec.ids, mode, rng);
  if (spec_.head_mode == HeadMode::kVerbalizer) {
    const int first_mask = encoded.dec.mask_positions.at(0);
    nn::Var state = pool(tape, graph.v_dec, graph.dec_pad_mask, Pooling::kMaskPosition,
                         std::span<const int>(&first_mask, 1));
    return tape.gather_cols(backbone_->vocab_logits(tape, state), verbalizer_ids_.ids());
  }
  nn::Var pooled = pool(tape, graph.v_dec, graph.dec_pad_mask, spec_.pooling,
                        encoded.dec.mask_positions);
  return head_.logits(tape, pooled);
}

nn::Var RelationModel::logits(nn::Tape& tape, const UnlabeledInstance& instance,
                              std::string_view id_lang, ForwardMode mode, Rng* rng) {
  return label_logits(tape, prepare(instance, id_lang), mode, rng);
}

nn::Var RelationModel::loss(nn::Tape& tape, const RelationInstance& instance, ForwardMode mode,
                            Rng* rng) {
  const int gold = static_cast<int>(spec_.labels.index_of(instance.label));
  const auto encoded = prepare(UnlabeledInstance::from(instance), id_lang_for(instance.lang));
  return tape.cross_entropy(label_logits(tape, encoded, mode, rng), std::span<const int>(&gold, 1));
}

std::vector<double> RelationModel::distribution(const UnlabeledInstance& instance,
                                                std::string_view id_lang) {
  const auto encoded = prepare(instance, id_lang);
  const BackboneStates states = forward(*backbone_, encoded.enc.ids, encoded.dec.ids);
  if (spec_.head_mode == HeadMode::kVerbalizer) {
    return verbalizer_distribution(*backbone_, verbalizer_ids_, states,
                                   encoded.dec.mask_positions.at(0));
  }
  return predict_distribution(head_, pool(states, spec_.pooling, encoded.dec.mask_positions));
}

std::vector<nn::Parameter*> RelationModel::parameters() {
  auto out = backbone_->parameters();
  if (spec_.head_mode == HeadMode::kLinear) {
    for (auto* p : head_.parameters()) out.push_back(p);
  }
  return out;
}

}  // namespace pxre
