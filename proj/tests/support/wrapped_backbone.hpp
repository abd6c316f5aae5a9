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

// A backbone kind defined outside the library, used to check that new
// architectures plug in through the registry alone.

#include <memory>
#include <string>
#include <vector>

#include "pxre/backbone.hpp"
#include "pxre/checkpoint.hpp"

namespace pxre::testing {

class WrappedBackbone final : public Backbone {
 public:
  explicit WrappedBackbone(TransformerBackbone inner) : inner_(std::move(inner)) {}

  std::string kind() const override { return "wrapped"; }
  int d_model() const override { return inner_.d_model(); }
  int max_len() const override { return inner_.max_len(); }
  const Vocab& vocab() const override { return inner_.vocab(); }
  BackboneGraph forward(nn::Tape& tape, std::span<const int> enc_ids, std::span<const int> dec_ids,
                        ForwardMode mode, Rng* rng) override {
    return inner_.forward(tape, enc_ids, dec_ids, mode, rng);
  }
  nn::Var vocab_logits(nn::Tape& tape, nn::Var dec_states) override {
    return inner_.vocab_logits(tape, dec_states);
  }
  std::vector<nn::Parameter*> parameters() override { return inner_.parameters(); }
  std::unique_ptr<Backbone> clone() const override {
    return std::make_unique<WrappedBackbone>(inner_);
  }
  std::string config_json() const override { return inner_.config_json(); }

 private:
  TransformerBackbone inner_;
};

inline void register_wrapped_backbone() {
  register_backbone_kind("wrapped", [](std::string_view config_json, Vocab vocab) {
    return std::make_unique<WrappedBackbone>(
        TransformerBackbone(TransformerBackbone::parse_config_json(config_json), std::move(vocab)));
  });
}

}  // namespace pxre::testing
