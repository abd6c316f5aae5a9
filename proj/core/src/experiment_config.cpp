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

#include "pxre/experiment_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pxre/digest.hpp"
#include "pxre/error.hpp"
#include "pxre/languages.hpp"
#include "pxre/prompt_templates.hpp"

namespace pxre {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.size() - start
                                                                           : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) {
    if (!out.empty()) out += ",";
    out += i;
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError("expected a number, got '" + v + "'");
  }
  return out;
}

template <typename Int>
Int parse_int(const std::string& v) {
  Int out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError("expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::filesystem::path&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string resolve(const std::string& value, const std::filesystem::path& base) {
  if (value.empty() || base.empty()) return value;
  const std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (base / p).lexically_normal().string();
}

const std::map<std::string, Field>& fields() {
  using C = ExperimentConfig;
  using P = std::filesystem::path;
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto str = [&t](const std::string& key, std::string C::*member, bool is_path) {
      t[key] = {[member, is_path](C& c, const std::string& v, const P& base) {
                  c.*member = is_path ? resolve(v, base) : v;
                },
                [member](const C& c) { return c.*member; }};
    };
    auto dbl = [&t](const std::string& key, double C::*member) {
      t[key] = {[member](C& c, const std::string& v, const P&) { c.*member = parse_double(v); },
                [member](const C& c) { return fmt_double(c.*member); }};
    };
    auto num = [&t](const std::string& key, int C::*member) {
      t[key] = {[member](C& c, const std::string& v, const P&) { c.*member = parse_int<int>(v); },
                [member](const C& c) { return std::to_string(c.*member); }};
    };
    auto toy_int = [&t](const std::string& key, int BackboneConfig::*member) {
      t[key] = {[member](C& c, const std::string& v, const P&) { c.toy.*member = parse_int<int>(v); },
                [member](const C& c) { return std::to_string(c.toy.*member); }};
    };
    auto list = [&t](const std::string& key, std::vector<std::string> C::*member, bool is_path) {
      t[key] = {[member, is_path](C& c, const std::string& v, const P& base) {
                  auto items = split_list(v);
                  if (is_path) {
                    for (auto& i : items) i = resolve(i, base);
                  }
                  c.*member = std::move(items);
                },
                [member](const C& c) { return join_list(c.*member); }};
    };

    str("template", &C::template_name, false);
    t["head_mode"] = {[](C& c, const std::string& v, const P&) { c.head_mode = parse_head_mode(v); },
                      [](const C& c) { return std::string(to_string(c.head_mode)); }};
    t["pooling"] = {[](C& c, const std::string& v, const P&) { c.pooling = parse_pooling(v); },
                    [](const C& c) { return std::string(to_string(c.pooling)); }};
    str("source_lang", &C::source_lang, false);
    list("target_langs", &C::target_langs, false);
    list("languages", &C::languages, false);
    t["backbone"] = {[](C& c, const std::string& v, const P& base) {
                       c.backbone = v == "toy" ? v : resolve(v, base);
                     },
                     [](const C& c) { return c.backbone; }};
    toy_int("d_model", &BackboneConfig::d_model);
    toy_int("n_layers_enc", &BackboneConfig::n_layers_enc);
    toy_int("n_layers_dec", &BackboneConfig::n_layers_dec);
    toy_int("n_heads", &BackboneConfig::n_heads);
    toy_int("ffn_width", &BackboneConfig::ffn_width);
    toy_int("max_len", &BackboneConfig::max_len);
    t["dropout"] = {[](C& c, const std::string& v, const P&) { c.toy.dropout = parse_double(v); },
                    [](const C& c) { return fmt_double(c.toy.dropout); }};
    t["init_std"] = {[](C& c, const std::string& v, const P&) { c.toy.init_std = parse_double(v); },
                     [](const C& c) { return fmt_double(c.toy.init_std); }};
    dbl("lr", &C::lr);
    num("batch_size", &C::batch_size);
    num("max_epochs", &C::max_epochs);
    dbl("weight_decay", &C::weight_decay);
    dbl("clip_norm", &C::clip_norm);
    t["seed"] = {[](C& c, const std::string& v, const P&) {
                   c.seed = parse_int<std::uint64_t>(v);
                   c.toy.seed = c.seed;
                 },
                 [](const C& c) { return std::to_string(c.seed); }};
    t["target_train_accuracy"] = {
        [](C& c, const std::string& v, const P&) {
          if (v == "none" || v.empty()) {
            c.target_train_accuracy.reset();
          } else {
            c.target_train_accuracy = parse_double(v);
          }
        },
        [](const C& c) {
          return c.target_train_accuracy ? fmt_double(*c.target_train_accuracy) : std::string("none");
        }};
    t["language_id_wrapping"] = {
        [](C& c, const std::string& v, const P&) { c.language_id_wrapping = parse_bool(v); },
        [](const C& c) { return std::string(c.language_id_wrapping ? "true" : "false"); }};
    t["eval_lang_id"] = {
        [](C& c, const std::string& v, const P&) { c.eval_lang_id = parse_lang_id_policy(v); },
        [](const C& c) { return std::string(to_string(c.eval_lang_id)); }};
    str("train_data", &C::train_data, true);
    str("dev_data", &C::dev_data, true);
    str("test_data", &C::test_data, true);
    str("target_data", &C::target_data, true);
    list("vocab_files", &C::vocab_files, true);
    str("verbalizer", &C::verbalizer, true);
    str("model_name", &C::model_name, false);
    return t;
  }();
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  resolve_template(template_name);
  const LanguageRegistry registry(languages);
  if (languages.empty()) throw ConfigError("languages must not be empty");
  if (!registry.contains(source_lang)) {
    throw ConfigError("source_lang '" + source_lang + "' is not registered (registered: " +
                      registry.listing() + ")");
  }
  for (const auto& t : target_langs) {
    if (!registry.contains(t)) {
      throw ConfigError("target language '" + t + "' is not registered (registered: " +
                        registry.listing() + ")");
    }
  }
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_epochs < 0) throw ConfigError("max_epochs must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be non-negative");
  if (target_train_accuracy && (*target_train_accuracy < 0.0 || *target_train_accuracy > 1.0)) {
    throw ConfigError("target_train_accuracy must lie in [0, 1]");
  }
  if (toy.dropout < 0.0 || toy.dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (backbone == "toy") toy.validate();
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
  return out;
}

std::string ExperimentConfig::fingerprint() const { return sha256_hex(to_text()).substr(0, 16); }

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      it->second.set(config, value, base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(where + " (" + key + "): " + e.what());
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_experiment_config(buf.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace pxre
