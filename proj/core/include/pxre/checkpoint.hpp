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
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "pxre/backbone.hpp"
#include "pxre/model.hpp"

namespace pxre {

/// Checkpoint container:
///
///   bytes 0..7    magic "PXRECKPT"
///   uint32 LE     container version
///   uint64 LE     header length N
///   N bytes       UTF-8 JSON header (version, kind, backbone kind and
///                 config, vocabulary, tensor table, optional model spec)
///   payload       every tensor as little-endian float64, row-major, in
///                 tensor-table order
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Rebuilds a backbone of one kind from its config JSON and vocabulary.
/// Parameters are overwritten from the checkpoint afterwards.
using BackboneFactory =
    std::function<std::unique_ptr<Backbone>(std::string_view config_json, Vocab vocab)>;

/// Makes an external backbone implementation loadable. "transformer" is
/// registered by default.
void register_backbone_kind(const std::string& kind, BackboneFactory factory);

void save_backbone(const std::filesystem::path& path, const Backbone& backbone);
std::unique_ptr<Backbone> load_backbone(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const RelationModel& model);
RelationModel load_model(const std::filesystem::path& path);

/// "backbone" or "relation_model"; throws on a malformed container.
std::string checkpoint_kind(const std::filesystem::path& path);

}  // namespace pxre
