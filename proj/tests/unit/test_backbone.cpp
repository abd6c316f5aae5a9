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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "pxre/backbone.hpp"
#include "pxre/error.hpp"
#include "pxre/noise.hpp"
#include "pxre/train_eval.hpp"
#include "pxre/vocab.hpp"
#include "support/gradcheck.hpp"

using namespace pxre;

namespace {

Vocab small_vocab(int words) {
  Vocab v;
  for (int i = 0; i < words; ++i) v.add("w" + std::to_string(i));
  return v;
}

BackboneConfig tiny(int d_model = 16, int layers = 1) {
  BackboneConfig c;
  c.d_model = d_model;
  c.n_layers_enc = layers;
  c.n_layers_dec = layers;
  c.n_heads = 2;
  c.ffn_width = 2 * d_model;
  c.max_len = 32;
  return c;
}

std::vector<int> random_ids(Rng& rng, const Vocab& v, int n) {
  std::vector<int> ids;
  for (int i = 0; i < n; ++i) {
    ids.push_back(v.num_reserved() +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(v.size() - v.num_reserved()))));
  }
  return ids;
}

std::vector<std::string> words(int n, const std::string& prefix = "w") {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

TEST_SUITE("seq2seq_backbone") {
  TEST_CASE("vocab reserves fixed low ids") {
    const Vocab v;
    CHECK(v.token(Vocab::kPad) == "<pad>");
    CHECK(v.token(Vocab::kBos) == "<s>");
    CHECK(v.token(Vocab::kEos) == "</s>");
    CHECK(v.token(Vocab::kUnk) == "<unk>");
    CHECK(v.token(Vocab::kMask) == "[MASK]");
    CHECK(v.token(5) == "[EN]");
    CHECK(v.token(6) == "[ZH]");
    CHECK(v.token(7) == "[AR]");
    CHECK(v.size() == 8);
    CHECK(v.lang_id("zh") == 6);
    CHECK_THROWS_AS(v.lang_id("fr"), ConfigError);
  }

  TEST_CASE("vocab is a bijection and round-trips from its token list") {
    Vocab v = small_vocab(20);
    CHECK(v.add("w3") == v.id("w3"));
    for (int i = 0; i < v.size(); ++i) CHECK(v.id(v.token(i)) == i);
    const Vocab back = Vocab::from_tokens(v.tokens(), v.languages());
    CHECK(back.tokens() == v.tokens());
    auto bad = v.tokens();
    std::swap(bad[0], bad[1]);
    CHECK_THROWS_AS(Vocab::from_tokens(bad, v.languages()), ModelError);
  }

  TEST_CASE("encode_tokens maps known tokens and falls back to <unk>") {
    Vocab v;
    const int a = v.add("a");
    const std::vector<std::string> toks{"<s>", "a", "</s>"};
    CHECK(encode_tokens(v, toks, 16) == std::vector<int>{Vocab::kBos, a, Vocab::kEos});
    const std::vector<std::string> unk{"<s>", "zzz", "</s>"};
    CHECK(encode_tokens(v, unk, 16)[1] == Vocab::kUnk);
  }

  TEST_CASE("truncation drops sentence-slot tokens and keeps entities and structure") {
    Vocab v;
    RelationInstance inst;
    inst.id = "long";
    inst.lang = "en";
    for (int i = 0; i < 600; ++i) inst.tokens.push_back("t" + std::to_string(i));
    inst.tokens[10] = "SUBJ";
    inst.tokens[590] = "OBJ";
    inst.subj = {10, 11};
    inst.obj = {590, 591};
    inst.label = "r";
    v.add_all(inst.tokens);
    const auto pair = wrap_language_ids(render(builtin_templates().get("Prompt_4"), inst), "en");
    const auto enc = encode_pair(v, pair, 512);
    for (const auto* side : {&enc.enc, &enc.dec}) {
      CHECK(side->ids.size() == 512);
      const auto count = [&](int id) { return std::count(side->ids.begin(), side->ids.end(), id); };
      CHECK(count(v.id("SUBJ")) == 2);  // in the sentence and the entity slot
      CHECK(count(v.id("OBJ")) == 2);
      CHECK(count(Vocab::kMask) == 2);
      CHECK(count(v.lang_id("en")) == 1);
      CHECK(count(Vocab::kBos) == 1);
      CHECK(count(Vocab::kEos) == 1);
      REQUIRE(side->mask_positions.size() == 2);
      for (int m : side->mask_positions) CHECK(side->ids[static_cast<std::size_t>(m)] == Vocab::kMask);
    }
    CHECK(enc.enc.ids.back() == v.lang_id("en"));
    CHECK(enc.dec.ids.front() == v.lang_id("en"));
    // Sentence tokens nearest the slot edges survive; the middle goes first.
    CHECK(std::count(enc.enc.ids.begin(), enc.enc.ids.end(), v.id("t0")) == 1);
    CHECK(std::count(enc.enc.ids.begin(), enc.enc.ids.end(), v.id("t599")) == 1);
    CHECK(std::count(enc.enc.ids.begin(), enc.enc.ids.end(), v.id("t300")) == 0);
  }

  TEST_CASE("truncation that cannot keep protected tokens throws") {
    Vocab v;
    RelationInstance inst{"x", "en", words(8), {0, 4}, {4, 8}, "r", false};
    v.add_all(inst.tokens);
    const auto pair = render(builtin_templates().get("Prompt_3"), inst);
    CHECK_THROWS_AS(encode_pair(v, pair, 6), ModelError);
  }

  TEST_CASE("config validation") {
    BackboneConfig c = tiny();
    c.n_heads = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny();
    c.max_len = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("forward shapes, determinism and range checks") {
    TransformerBackbone m(tiny(), small_vocab(30));
    Rng rng(3);
    const auto enc = random_ids(rng, m.vocab(), 9);
    const auto dec = random_ids(rng, m.vocab(), 6);
    const auto a = forward(m, enc, dec);
    const auto b = forward(m, enc, dec);
    CHECK(a.v_enc.rows() == 9);
    CHECK(a.v_enc.cols() == 16);
    CHECK(a.v_dec.rows() == 6);
    CHECK(a.dec_pad_mask.size() == 6);
    CHECK(a.v_dec == b.v_dec);  // bitwise
    TransformerBackbone same_seed(tiny(), small_vocab(30));
    CHECK(forward(same_seed, enc, dec).v_dec == a.v_dec);

    auto bad = enc;
    bad[0] = m.vocab().size();
    CHECK_THROWS_AS(forward(m, bad, dec), ModelError);
    bad[0] = -1;
    CHECK_THROWS_AS(forward(m, bad, dec), ModelError);
    const std::vector<int> too_long(40, m.vocab().num_reserved());
    CHECK_THROWS_AS(forward(m, too_long, dec), ModelError);
  }

  TEST_CASE("decoder is causal") {
    TransformerBackbone m(tiny(16, 2), small_vocab(30));
    Rng rng(4);
    const auto enc = random_ids(rng, m.vocab(), 7);
    auto dec = random_ids(rng, m.vocab(), 8);
    const auto before = forward(m, enc, dec).v_dec;
    const int t = 5;
    dec[t] = dec[t] == m.vocab().num_reserved() ? dec[t] + 1 : m.vocab().num_reserved();
    const auto after = forward(m, enc, dec).v_dec;
    CHECK(before.topRows(t) == after.topRows(t));
    CHECK((before.row(t) - after.row(t)).norm() > 1e-9);
  }

  TEST_CASE("encoder order matters") {
    TransformerBackbone m(tiny(16, 2), small_vocab(30));
    Rng rng(5);
    auto enc = random_ids(rng, m.vocab(), 8);
    const auto dec = random_ids(rng, m.vocab(), 4);
    const auto before = forward(m, enc, dec).v_dec;
    std::reverse(enc.begin(), enc.end());
    CHECK((before - forward(m, enc, dec).v_dec).norm() > 1e-6);
  }

  TEST_CASE("clone is deep and config JSON round-trips") {
    TransformerBackbone m(tiny(), small_vocab(10));
    auto copy = m.clone();
    copy->parameters()[0]->value.setZero();
    CHECK(m.parameters()[0]->value.norm() > 0.0);
    CHECK(TransformerBackbone::parse_config_json(m.config_json()) == m.config());
  }

  TEST_CASE("noise: reserved tokens survive and a single sentence keeps its order") {
    std::vector<std::string> toks{"<s>"};
    for (auto& w : words(40)) toks.push_back(w);
    toks.push_back("</s>");
    toks.push_back("[EN]");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = apply_noise(toks, seed);
      CHECK(r.sentences == 1);
      CHECK(r.tokens.front() == "<s>");
      CHECK(r.tokens[r.tokens.size() - 2] == "</s>");
      CHECK(r.tokens.back() == "[EN]");
      CHECK(r.maskable_tokens == 40);
      CHECK(r.masked_tokens == 14);  // llround(0.35 * 40)
      CHECK(std::accumulate(r.span_lengths.begin(), r.span_lengths.end(), std::size_t{0}) ==
            r.masked_tokens);
      std::vector<std::string> kept;
      for (const auto& t : r.tokens) {
        if (t != "[MASK]") kept.push_back(t);
      }
      CHECK(kept.size() == toks.size() - r.masked_tokens);
      std::size_t cursor = 0;
      for (const auto& t : kept) {
        while (cursor < toks.size() && toks[cursor] != t) ++cursor;
        CHECK(cursor < toks.size());  // kept tokens form a subsequence
        ++cursor;
      }
      const auto masks = static_cast<std::size_t>(std::count(r.tokens.begin(), r.tokens.end(), "[MASK]"));
      CHECK(masks == r.span_lengths.size());
      for (int len : r.span_lengths) CHECK(len >= 1);
    }
  }

  TEST_CASE("noise: multi-sentence input is permuted, deterministically per seed") {
    std::vector<std::string> toks;
    for (int s = 0; s < 6; ++s) {
      for (int w = 0; w < 4; ++w) toks.push_back("s" + std::to_string(s) + "w" + std::to_string(w));
      toks.push_back(".");
    }
    NoiseOptions no_mask;
    no_mask.mask_ratio = 0.0;
    bool changed = false;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto r = apply_noise(toks, seed, no_mask);
      CHECK(r.sentences == 6);
      CHECK(r.tokens.size() == toks.size());
      CHECK(std::is_permutation(r.tokens.begin(), r.tokens.end(), toks.begin()));
      changed = changed || r.tokens != toks;
      CHECK(apply_noise(toks, seed).tokens == apply_noise(toks, seed).tokens);
    }
    CHECK(changed);
  }

  TEST_CASE("denoising example keeps the original length as target") {
    Vocab v = small_vocab(30);
    const MonolingualSentence s{"zh", words(12)};
    const auto ex = make_denoising_example(v, s, 7, 64);
    CHECK(ex.targets.size() == 12);
    CHECK(ex.dec_ids.size() == 12);
    CHECK(ex.dec_ids.front() == v.lang_id("zh"));
    CHECK(ex.enc_ids.back() == v.lang_id("zh"));
    CHECK(ex.enc_ids[ex.enc_ids.size() - 2] == Vocab::kEos);
    for (std::size_t i = 1; i < ex.dec_ids.size(); ++i) CHECK(ex.dec_ids[i] == ex.targets[i - 1]);
  }

  TEST_CASE("denoising loss of a uniform model is ln|V| per language") {
    TransformerBackbone m(tiny(), small_vocab(30));
    for (auto* p : m.parameters()) p->value.setZero();
    const double ln_v = std::log(static_cast<double>(m.vocab().size()));
    const std::vector<MonolingualSentence> one{{"en", words(9)}, {"en", words(5)}};
    const std::vector<MonolingualSentence> two{{"en", words(9)}, {"zh", words(5)}};
    nn::Tape t(false);
    CHECK(denoising_loss(t, m, one, 1).value()(0, 0) == doctest::Approx(ln_v).epsilon(1e-12));
    CHECK(denoising_loss(t, m, two, 1).value()(0, 0) ==
          doctest::Approx(2.0 * ln_v).epsilon(1e-12));
    CHECK_THROWS_AS(denoising_loss(t, m, std::vector<MonolingualSentence>{}, 1), ModelError);
  }

  TEST_CASE("denoising loss gradients match central differences") {
    TransformerBackbone m(tiny(16, 2), small_vocab(25));
    const std::vector<MonolingualSentence> batch{{"en", words(10)}, {"zh", words(7)}};
    const auto g = pxre::testing::grad_check(
        m.parameters(), [&](nn::Tape& t) { return denoising_loss(t, m, batch, 3); }, 20, 17);
    CHECK(g.checked == 20);
    CHECK(g.max_rel_error < 1e-3);
  }

  TEST_CASE("toy pretraining halves the loss within 200 steps") {
    TransformerBackbone m(tiny(16, 1), small_vocab(20));
    Rng rng(8);
    std::vector<MonolingualSentence> corpus;
    for (int i = 0; i < 50; ++i) {
      MonolingualSentence s{"en", {}};
      const int len = 6 + static_cast<int>(rng.below(5));
      for (int k = 0; k < len; ++k) s.tokens.push_back("w" + std::to_string(rng.below(20)));
      corpus.push_back(std::move(s));
    }
    PretrainOptions o;
    o.steps = 200;
    o.batch_size = 10;
    o.adam.lr = 1e-2;
    const auto history = pretrain(m, corpus, o);
    REQUIRE(history.size() == 200);
    const double head = std::accumulate(history.begin(), history.begin() + 10, 0.0) / 10.0;
    const double tail = std::accumulate(history.end() - 10, history.end(), 0.0) / 10.0;
    CHECK(tail < 0.5 * head);
  }
}
