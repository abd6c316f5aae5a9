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

#include "pxre/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>

#include "json.hpp"
#include "pxre/error.hpp"

namespace pxre {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr char kMagic[8] = {'P', 'X', 'R', 'E', 'C', 'K', 'P', 'T'};

std::map<std::string, BackboneFactory>& factories() {
  static std::map<std::string, BackboneFactory> registry = {
      {"transformer", [](std::string_view config, Vocab vocab) -> std::unique_ptr<Backbone> {
         return std::make_unique<TransformerBackbone>(TransformerBackbone::parse_config_json(config),
                                                      std::move(vocab));
       }}};
  return registry;
}

std::mutex& factories_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
void put_le(std::string& out, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = sizeof(T); i-- > 0;) out.push_back(static_cast<char>(bytes[i]));
  } else {
    out.append(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <typename T>
T get_le(const char* data) {
  T value;
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(data[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
  } else {
    std::memcpy(&value, data, sizeof(T));
  }
  return value;
}

ordered_json spec_to_json(const ModelSpec& spec) {
  ordered_json j;
  j["prompt"] = {{"name", spec.prompt.name},
                 {"enc", spec.prompt.enc_spec()},
                 {"dec", spec.prompt.dec_spec()}};
  j["head_mode"] = to_string(spec.head_mode);
  j["pooling"] = to_string(spec.pooling);
  j["source_lang"] = spec.source_lang;
  j["language_id_wrapping"] = spec.language_id_wrapping;
  j["lang_id_policy"] = to_string(spec.lang_id_policy);
  j["labels"] = spec.labels.labels();
  j["verbalizer"] = spec.verbalizer.mapping();
  j["model_name"] = spec.model_name;
  j["config_fingerprint"] = spec.config_fingerprint;
  j["target_data"] = spec.target_data;
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  const auto& p = j.at("prompt");
  spec.prompt = parse_template_spec(p.at("enc").get<std::string>(), p.at("dec").get<std::string>(),
                                    p.at("name").get<std::string>());
  spec.head_mode = parse_head_mode(j.at("head_mode").get<std::string>());
  spec.pooling = parse_pooling(j.at("pooling").get<std::string>());
  spec.source_lang = j.at("source_lang").get<std::string>();
  spec.language_id_wrapping = j.at("language_id_wrapping").get<bool>();
  spec.lang_id_policy = parse_lang_id_policy(j.at("lang_id_policy").get<std::string>());
  spec.labels = LabelSpace(j.at("labels").get<std::vector<std::string>>());
  spec.verbalizer = Verbalizer(j.at("verbalizer").get<std::map<std::string, std::string>>());
  spec.model_name = j.value("model_name", std::string("prompt"));
  spec.config_fingerprint = j.value("config_fingerprint", std::string());
  spec.target_data = j.value("target_data", std::string());
  return spec;
}

void write_container(const std::filesystem::path& path, ordered_json header,
                     const std::vector<const nn::Parameter*>& tensors) {
  ordered_json table = ordered_json::array();
  for (const auto* t : tensors) {
    table.push_back({{"name", t->name}, {"rows", t->value.rows()}, {"cols", t->value.cols()}});
  }
  header["tensors"] = std::move(table);
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  for (const auto* t : tensors) {
    for (Eigen::Index i = 0; i < t->value.size(); ++i) put_le<double>(out, t->value.data()[i]);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write checkpoint '" + path.string() + "'");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for checkpoint '" + path.string() + "'");
}

struct Container {
  json header;
  std::string payload;
};

Container read_container(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  const std::size_t fixed = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);
  if (bytes.size() < fixed || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ModelError("'" + path.string() + "' is not a pxre checkpoint");
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + sizeof(kMagic));
  if (version != kCheckpointVersion) {
    throw ModelError("checkpoint version " + std::to_string(version) + " is not supported");
  }
  const auto header_len = get_le<std::uint64_t>(bytes.data() + sizeof(kMagic) + sizeof(std::uint32_t));
  if (bytes.size() < fixed + header_len) throw ModelError("truncated checkpoint header");
  Container c;
  try {
    c.header = json::parse(bytes.begin() + static_cast<long>(fixed),
                           bytes.begin() + static_cast<long>(fixed + header_len));
  } catch (const json::exception& e) {
    throw ModelError(std::string("corrupt checkpoint header: ") + e.what());
  }
  if (c.header.value("version", 0U) != kCheckpointVersion) {
    throw ModelError("checkpoint header lacks a supported version field");
  }
  c.payload = bytes.substr(fixed + header_len);
  return c;
}

ordered_json backbone_header(const Backbone& backbone, std::string_view kind) {
  ordered_json h;
  h["format"] = "pxre-checkpoint";
  h["version"] = kCheckpointVersion;
  h["kind"] = kind;
  h["backbone"] = {{"kind", backbone.kind()}, {"config", json::parse(backbone.config_json())}};
  h["vocab"] = {{"languages", backbone.vocab().languages().codes()},
                {"tokens", backbone.vocab().tokens()}};
  return h;
}

/// Fills parameters in table order; returns the byte offset consumed.
std::size_t fill_tensors(const json& table, std::size_t first, const std::string& payload,
                         std::size_t offset, const std::vector<nn::Parameter*>& params) {
  if (table.size() < first + params.size()) throw ModelError("checkpoint tensor table too short");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = table.at(first + i);
    nn::Parameter& p = *params[i];
    if (entry.at("name").get<std::string>() != p.name ||
        entry.at("rows").get<Eigen::Index>() != p.value.rows() ||
        entry.at("cols").get<Eigen::Index>() != p.value.cols()) {
      throw ModelError("checkpoint tensor '" + entry.at("name").get<std::string>() +
                       "' does not match parameter '" + p.name + "'");
    }
    const auto bytes = static_cast<std::size_t>(p.value.size()) * sizeof(double);
    if (offset + bytes > payload.size()) throw ModelError("truncated checkpoint payload");
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      p.value.data()[k] = get_le<double>(payload.data() + offset + static_cast<std::size_t>(k) * sizeof(double));
    }
    p.zero_grad();
    offset += bytes;
  }
  return offset;
}

std::unique_ptr<Backbone> backbone_from(const Container& c, std::size_t& offset) {
  const auto& b = c.header.at("backbone");
  const auto kind = b.at("kind").get<std::string>();
  BackboneFactory factory;
  {
    std::lock_guard lock(factories_mutex());
    auto it = factories().find(kind);
    if (it == factories().end()) throw ModelError("no backbone factory registered for kind '" + kind + "'");
    factory = it->second;
  }
  const auto& v = c.header.at("vocab");
  Vocab vocab = Vocab::from_tokens(v.at("tokens").get<std::vector<std::string>>(),
                                   LanguageRegistry(v.at("languages").get<std::vector<std::string>>()));
  auto backbone = factory(b.at("config").dump(), std::move(vocab));
  offset = fill_tensors(c.header.at("tensors"), 0, c.payload, 0, backbone->parameters());
  return backbone;
}

}  // namespace

void register_backbone_kind(const std::string& kind, BackboneFactory factory) {
  std::lock_guard lock(factories_mutex());
  factories()[kind] = std::move(factory);
}

void save_backbone(const std::filesystem::path& path, const Backbone& backbone) {
  write_container(path, backbone_header(backbone, "backbone"), backbone.parameters());
}

std::unique_ptr<Backbone> load_backbone(const std::filesystem::path& path) {
  const Container c = read_container(path);
  std::size_t offset = 0;
  return backbone_from(c, offset);
}

void save_model(const std::filesystem::path& path, const RelationModel& model) {
  auto header = backbone_header(model.backbone(), "relation_model");
  header["spec"] = spec_to_json(model.spec());
  auto tensors = model.backbone().parameters();
  tensors.push_back(&model.head().weight);
  tensors.push_back(&model.head().bias);
  write_container(path, std::move(header), tensors);
}

RelationModel load_model(const std::filesystem::path& path) {
  const Container c = read_container(path);
  if (c.header.value("kind", std::string()) != "relation_model") {
    throw ModelError("'" + path.string() + "' holds a bare backbone, not a trained relation model");
  }
  std::size_t offset = 0;
  auto backbone = backbone_from(c, offset);
  ModelSpec spec = spec_from_json(c.header.at("spec"));
  const auto first_head = backbone->parameters().size();
  ClassifierHead head;
  head.weight = nn::Parameter("head.weight",
                              nn::Matrix::Zero(static_cast<Eigen::Index>(spec.labels.size()),
                                               backbone->d_model()));
  head.bias = nn::Parameter("head.bias",
                            nn::Matrix::Zero(1, static_cast<Eigen::Index>(spec.labels.size())));
  fill_tensors(c.header.at("tensors"), first_head, c.payload, offset, head.parameters());
  head.pooling = spec.pooling;
  return RelationModel(std::move(backbone), std::move(spec), std::move(head));
}

std::string checkpoint_kind(const std::filesystem::path& path) {
  return read_container(path).header.value("kind", std::string());
}

}  // namespace pxre
