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
#include <span>
#include <string>
#include <vector>

#include "pxre/autograd.hpp"
#include "pxre/vocab.hpp"

namespace pxre {

struct BackboneConfig {
  int d_model = 32;
  int n_layers_enc = 2;
  int n_layers_dec = 2;
  int n_heads = 4;
  int ffn_width = 64;
  int max_len = 128;
  double dropout = 0.0;
  double init_std = 0.05;
  std::uint64_t seed = 1;

  /// Throws ConfigError when d_model is not divisible by n_heads or a size
  /// is non-positive.
  void validate() const;
  bool operator==(const BackboneConfig&) const = default;
};

/// Hidden vectors of one encoder/decoder pass, detached from any tape.
struct BackboneStates {
  nn::Matrix v_enc;  // (encoder length, d_model)
  nn::Matrix v_dec;  // (decoder length, d_model)
  std::vector<bool> dec_pad_mask;  // true for real decoder positions
};

/// Graph handles for one pass, for training.
struct BackboneGraph {
  nn::Var v_enc;
  nn::Var v_dec;
  std::vector<bool> dec_pad_mask;
};

enum class ForwardMode { kEval, kTrain };

/// Encoder-decoder model M. Implementations map id sequences to per-position
/// hidden vectors and expose a vocabulary projection for token-level
/// objectives. RelationModel, the denoising step, and all training code
/// depend only on this interface.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::string kind() const = 0;
  virtual int d_model() const = 0;
  virtual int max_len() const = 0;
  virtual const Vocab& vocab() const = 0;

  /// Records one pass on `tape`. The decoder is causal. `rng` drives dropout
  /// and may be null in eval mode. Throws ModelError for ids outside the
  /// vocabulary or sequences longer than max_len.
  virtual BackboneGraph forward(nn::Tape& tape, std::span<const int> enc_ids,
                                std::span<const int> dec_ids, ForwardMode mode, Rng* rng) = 0;

  /// Vocabulary logits (rows, |V|) for decoder states.
  virtual nn::Var vocab_logits(nn::Tape& tape, nn::Var dec_states) = 0;

  virtual std::vector<nn::Parameter*> parameters() = 0;
  virtual std::unique_ptr<Backbone> clone() const = 0;
  /// JSON object describing the architecture; stored in checkpoints and
  /// handed back to the registered factory for `kind()` on load.
  virtual std::string config_json() const = 0;

  std::vector<const nn::Parameter*> parameters() const;
  std::size_t parameter_count() const;
};

/// Eval-mode pass without gradient recording.
BackboneStates forward(Backbone& model, std::span<const int> enc_ids,
                       std::span<const int> dec_ids);

/// Pre-LayerNorm transformer: shared token embeddings tied to the output
/// projection, learned positions, multi-head attention, GELU feed-forward.
class TransformerBackbone final : public Backbone {
 public:
  TransformerBackbone(BackboneConfig config, Vocab vocab);

  std::string kind() const override { return "transformer"; }
  int d_model() const override { return config_.d_model; }
  int max_len() const override { return config_.max_len; }
  const Vocab& vocab() const override { return vocab_; }
  const BackboneConfig& config() const { return config_; }

  BackboneGraph forward(nn::Tape& tape, std::span<const int> enc_ids,
                        std::span<const int> dec_ids, ForwardMode mode, Rng* rng) override;
  nn::Var vocab_logits(nn::Tape& tape, nn::Var dec_states) override;
  std::vector<nn::Parameter*> parameters() override;
  std::unique_ptr<Backbone> clone() const override;
  std::string config_json() const override;

  static BackboneConfig parse_config_json(std::string_view text);

 private:
  struct Attention {
    nn::Parameter wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct Norm {
    nn::Parameter gain, bias;
  };
  struct FeedForward {
    nn::Parameter w1, b1, w2, b2;
  };
  struct EncoderLayer {
    Norm ln_attn;
    Attention self_attn;
    Norm ln_ffn;
    FeedForward ffn;
  };
  struct DecoderLayer {
    Norm ln_self;
    Attention self_attn;
    Norm ln_cross;
    Attention cross_attn;
    Norm ln_ffn;
    FeedForward ffn;
  };

  Attention make_attention(const std::string& prefix, Rng& rng) const;
  Norm make_norm(const std::string& prefix) const;
  FeedForward make_ffn(const std::string& prefix, Rng& rng) const;

  nn::Var attend(nn::Tape& tape, Attention& attn, nn::Var queries, nn::Var keys,
                 const nn::Matrix& additive_mask);
  nn::Var norm(nn::Tape& tape, Norm& n, nn::Var x);
  nn::Var feed_forward(nn::Tape& tape, FeedForward& f, nn::Var x, ForwardMode mode, Rng* rng);
  nn::Var drop(nn::Tape& tape, nn::Var x, ForwardMode mode, Rng* rng);
  nn::Var embed(nn::Tape& tape, std::span<const int> ids, nn::Parameter& positions, Norm& ln,
                ForwardMode mode, Rng* rng);

  BackboneConfig config_;
  Vocab vocab_;
  nn::Parameter tok_emb_;
  nn::Parameter enc_pos_;
  nn::Parameter dec_pos_;
  Norm enc_emb_ln_;
  Norm dec_emb_ln_;
  std::vector<EncoderLayer> enc_layers_;
  std::vector<DecoderLayer> dec_layers_;
  Norm enc_final_ln_;
  Norm dec_final_ln_;
  nn::Parameter lm_bias_;
};

}  // namespace pxre
