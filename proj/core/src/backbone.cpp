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

#include "pxre/backbone.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "pxre/error.hpp"

namespace pxre {
namespace {

using nn::Matrix;
using nn::Parameter;
using nn::Tape;
using nn::Var;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_ids(std::span<const int> ids, const Vocab& vocab, int max_len, const char* side) {
  if (ids.empty()) throw ModelError(std::string(side) + " sequence is empty");
  if (static_cast<int>(ids.size()) > max_len) {
    throw ModelError(std::string(side) + " sequence of length " + std::to_string(ids.size()) +
                     " exceeds max_len " + std::to_string(max_len));
  }
  for (int id : ids) {
    if (id < 0 || id >= vocab.size()) {
      throw ModelError(std::string(side) + " token id " + std::to_string(id) +
                       " out of range [0, " + std::to_string(vocab.size()) + ")");
    }
  }
}

/// Additive attention mask: -inf for padded keys and, when causal, for
/// future positions. A query row with no visible key falls back to seeing
/// every key so softmax stays defined.
Matrix attention_mask(std::span<const int> query_ids, std::span<const int> key_ids, bool causal) {
  const auto q = static_cast<Eigen::Index>(query_ids.size());
  const auto k = static_cast<Eigen::Index>(key_ids.size());
  Matrix mask = Matrix::Zero(q, k);
  for (Eigen::Index i = 0; i < q; ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < k; ++j) {
      const bool hidden = key_ids[static_cast<std::size_t>(j)] == Vocab::kPad || (causal && j > i);
      if (hidden) {
        mask(i, j) = kNegInf;
      } else {
        any = true;
      }
    }
    if (!any) mask.row(i).setZero();
  }
  return mask;
}

}  // namespace

void BackboneConfig::validate() const {
  if (d_model <= 0 || n_heads <= 0 || ffn_width <= 0 || max_len <= 0 || n_layers_enc < 0 ||
      n_layers_dec < 0) {
    throw ConfigError("backbone sizes must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                      std::to_string(n_heads));
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
}

std::vector<const nn::Parameter*> Backbone::parameters() const {
  auto* self = const_cast<Backbone*>(this);
  auto ps = self->parameters();
  return {ps.begin(), ps.end()};
}

std::size_t Backbone::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += static_cast<std::size_t>(p->size());
  return n;
}

BackboneStates forward(Backbone& model, std::span<const int> enc_ids,
                       std::span<const int> dec_ids) {
  Tape tape(false);
  auto graph = model.forward(tape, enc_ids, dec_ids, ForwardMode::kEval, nullptr);
  return {graph.v_enc.value(), graph.v_dec.value(), std::move(graph.dec_pad_mask)};
}

TransformerBackbone::TransformerBackbone(BackboneConfig config, Vocab vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  Rng rng(config_.seed);
  const int d = config_.d_model;
  tok_emb_ = nn::normal_parameter("tok_emb", vocab_.size(), d, config_.init_std, rng);
  enc_pos_ = nn::normal_parameter("enc_pos", config_.max_len, d, config_.init_std, rng);
  dec_pos_ = nn::normal_parameter("dec_pos", config_.max_len, d, config_.init_std, rng);
  enc_emb_ln_ = make_norm("enc_emb_ln");
  dec_emb_ln_ = make_norm("dec_emb_ln");
  for (int l = 0; l < config_.n_layers_enc; ++l) {
    const std::string p = "enc." + std::to_string(l) + ".";
    enc_layers_.push_back({make_norm(p + "ln_attn"), make_attention(p + "self_attn", rng),
                           make_norm(p + "ln_ffn"), make_ffn(p + "ffn", rng)});
  }
  for (int l = 0; l < config_.n_layers_dec; ++l) {
    const std::string p = "dec." + std::to_string(l) + ".";
    dec_layers_.push_back({make_norm(p + "ln_self"), make_attention(p + "self_attn", rng),
                           make_norm(p + "ln_cross"), make_attention(p + "cross_attn", rng),
                           make_norm(p + "ln_ffn"), make_ffn(p + "ffn", rng)});
  }
  enc_final_ln_ = make_norm("enc_final_ln");
  dec_final_ln_ = make_norm("dec_final_ln");
  lm_bias_ = nn::constant_parameter("lm_bias", 1, vocab_.size(), 0.0);
}

TransformerBackbone::Attention TransformerBackbone::make_attention(const std::string& prefix,
                                                                   Rng& rng) const {
  const int d = config_.d_model;
  const double s = config_.init_std;
  return {nn::normal_parameter(prefix + ".wq", d, d, s, rng),
          nn::constant_parameter(prefix + ".bq", 1, d, 0.0),
          nn::normal_parameter(prefix + ".wk", d, d, s, rng),
          nn::constant_parameter(prefix + ".bk", 1, d, 0.0),
          nn::normal_parameter(prefix + ".wv", d, d, s, rng),
          nn::constant_parameter(prefix + ".bv", 1, d, 0.0),
          nn::normal_parameter(prefix + ".wo", d, d, s, rng),
          nn::constant_parameter(prefix + ".bo", 1, d, 0.0)};
}

TransformerBackbone::Norm TransformerBackbone::make_norm(const std::string& prefix) const {
  return {nn::constant_parameter(prefix + ".gain", 1, config_.d_model, 1.0),
          nn::constant_parameter(prefix + ".bias", 1, config_.d_model, 0.0)};
}

TransformerBackbone::FeedForward TransformerBackbone::make_ffn(const std::string& prefix,
                                                               Rng& rng) const {
  const int d = config_.d_model;
  const int f = config_.ffn_width;
  const double s = config_.init_std;
  return {nn::normal_parameter(prefix + ".w1", d, f, s, rng),
          nn::constant_parameter(prefix + ".b1", 1, f, 0.0),
          nn::normal_parameter(prefix + ".w2", f, d, s, rng),
          nn::constant_parameter(prefix + ".b2", 1, d, 0.0)};
}

Var TransformerBackbone::drop(Tape& tape, Var x, ForwardMode mode, Rng* rng) {
  if (mode != ForwardMode::kTrain || config_.dropout <= 0.0 || rng == nullptr) return x;
  return tape.dropout(x, config_.dropout, *rng);
}

Var TransformerBackbone::norm(Tape& tape, Norm& n, Var x) {
  return tape.layer_norm(x, tape.param(n.gain), tape.param(n.bias));
}

Var TransformerBackbone::attend(Tape& tape, Attention& attn, Var queries, Var keys,
                                const Matrix& additive_mask) {
  const int heads = config_.n_heads;
  const int dh = config_.d_model / heads;
  Var q = tape.add_row(tape.matmul(queries, tape.param(attn.wq)), tape.param(attn.bq));
  Var k = tape.add_row(tape.matmul(keys, tape.param(attn.wk)), tape.param(attn.bk));
  Var v = tape.add_row(tape.matmul(keys, tape.param(attn.wv)), tape.param(attn.bv));
  Var mask = tape.constant(additive_mask);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outputs;
  outputs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Var qh = tape.slice_cols(q, h * dh, dh);
    Var kh = tape.slice_cols(k, h * dh, dh);
    Var vh = tape.slice_cols(v, h * dh, dh);
    Var scores = tape.add(tape.scale(tape.matmul_nt(qh, kh), scale), mask);
    outputs.push_back(tape.matmul(tape.softmax_rows(scores), vh));
  }
  Var merged = heads == 1 ? outputs.front() : tape.concat_cols(outputs);
  return tape.add_row(tape.matmul(merged, tape.param(attn.wo)), tape.param(attn.bo));
}

Var TransformerBackbone::feed_forward(Tape& tape, FeedForward& f, Var x, ForwardMode mode,
                                      Rng* rng) {
  Var h = tape.gelu(tape.add_row(tape.matmul(x, tape.param(f.w1)), tape.param(f.b1)));
  h = drop(tape, h, mode, rng);
  return tape.add_row(tape.matmul(h, tape.param(f.w2)), tape.param(f.b2));
}

Var TransformerBackbone::embed(Tape& tape, std::span<const int> ids, Parameter& positions,
                               Norm& ln, ForwardMode mode, Rng* rng) {
  std::vector<int> pos(ids.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);
  Var x = tape.add(tape.gather_rows(tape.param(tok_emb_), ids),
                   tape.gather_rows(tape.param(positions), pos));
  return drop(tape, norm(tape, ln, x), mode, rng);
}

BackboneGraph TransformerBackbone::forward(Tape& tape, std::span<const int> enc_ids,
                                           std::span<const int> dec_ids, ForwardMode mode,
                                           Rng* rng) {
  check_ids(enc_ids, vocab_, config_.max_len, "encoder");
  check_ids(dec_ids, vocab_, config_.max_len, "decoder");

  Var x = embed(tape, enc_ids, enc_pos_, enc_emb_ln_, mode, rng);
  const Matrix enc_mask = attention_mask(enc_ids, enc_ids, false);
  for (auto& layer : enc_layers_) {
    Var normed = norm(tape, layer.ln_attn, x);
    Var a = attend(tape, layer.self_attn, normed, normed, enc_mask);
    x = tape.add(x, drop(tape, a, mode, rng));
    Var f = feed_forward(tape, layer.ffn, norm(tape, layer.ln_ffn, x), mode, rng);
    x = tape.add(x, drop(tape, f, mode, rng));
  }
  Var v_enc = norm(tape, enc_final_ln_, x);

  Var y = embed(tape, dec_ids, dec_pos_, dec_emb_ln_, mode, rng);
  const Matrix self_mask = attention_mask(dec_ids, dec_ids, true);
  const Matrix cross_mask = attention_mask(dec_ids, enc_ids, false);
  for (auto& layer : dec_layers_) {
    Var normed = norm(tape, layer.ln_self, y);
    Var a = attend(tape, layer.self_attn, normed, normed, self_mask);
    y = tape.add(y, drop(tape, a, mode, rng));
    Var c = attend(tape, layer.cross_attn, norm(tape, layer.ln_cross, y), v_enc, cross_mask);
    y = tape.add(y, drop(tape, c, mode, rng));
    Var f = feed_forward(tape, layer.ffn, norm(tape, layer.ln_ffn, y), mode, rng);
    y = tape.add(y, drop(tape, f, mode, rng));
  }
  Var v_dec = norm(tape, dec_final_ln_, y);

  std::vector<bool> pad_mask(dec_ids.size());
  for (std::size_t i = 0; i < dec_ids.size(); ++i) pad_mask[i] = dec_ids[i] != Vocab::kPad;
  return {v_enc, v_dec, std::move(pad_mask)};
}

Var TransformerBackbone::vocab_logits(Tape& tape, Var dec_states) {
  return tape.add_row(tape.matmul_nt(dec_states, tape.param(tok_emb_)), tape.param(lm_bias_));
}

std::vector<nn::Parameter*> TransformerBackbone::parameters() {
  std::vector<Parameter*> out = {&tok_emb_, &enc_pos_, &dec_pos_, &enc_emb_ln_.gain,
                                 &enc_emb_ln_.bias, &dec_emb_ln_.gain, &dec_emb_ln_.bias};
  auto add_attn = [&](Attention& a) {
    for (auto* p : {&a.wq, &a.bq, &a.wk, &a.bk, &a.wv, &a.bv, &a.wo, &a.bo}) out.push_back(p);
  };
  auto add_norm = [&](Norm& n) {
    out.push_back(&n.gain);
    out.push_back(&n.bias);
  };
  auto add_ffn = [&](FeedForward& f) {
    for (auto* p : {&f.w1, &f.b1, &f.w2, &f.b2}) out.push_back(p);
  };
  for (auto& l : enc_layers_) {
    add_norm(l.ln_attn);
    add_attn(l.self_attn);
    add_norm(l.ln_ffn);
    add_ffn(l.ffn);
  }
  for (auto& l : dec_layers_) {
    add_norm(l.ln_self);
    add_attn(l.self_attn);
    add_norm(l.ln_cross);
    add_attn(l.cross_attn);
    add_norm(l.ln_ffn);
    add_ffn(l.ffn);
  }
  add_norm(enc_final_ln_);
  add_norm(dec_final_ln_);
  out.push_back(&lm_bias_);
  return out;
}

std::unique_ptr<Backbone> TransformerBackbone::clone() const {
  return std::make_unique<TransformerBackbone>(*this);
}

std::string TransformerBackbone::config_json() const {
  nlohmann::ordered_json j;
  j["d_model"] = config_.d_model;
  j["n_layers_enc"] = config_.n_layers_enc;
  j["n_layers_dec"] = config_.n_layers_dec;
  j["n_heads"] = config_.n_heads;
  j["ffn_width"] = config_.ffn_width;
  j["max_len"] = config_.max_len;
  j["dropout"] = config_.dropout;
  j["init_std"] = config_.init_std;
  j["seed"] = config_.seed;
  return j.dump();
}

BackboneConfig TransformerBackbone::parse_config_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  BackboneConfig c;
  c.d_model = j.at("d_model").get<int>();
  c.n_layers_enc = j.at("n_layers_enc").get<int>();
  c.n_layers_dec = j.at("n_layers_dec").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.ffn_width = j.at("ffn_width").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.init_std = j.value("init_std", c.init_std);
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace pxre
