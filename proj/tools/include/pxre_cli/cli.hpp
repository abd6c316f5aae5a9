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
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pxre::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kManifestSchema = "pxre.run_manifest/1";
inline constexpr const char* kManifestFile = "manifest.json";

/// Runs one subcommand. `args` excludes the program name. Results go to
/// `out`, usage and error messages to `err`, structured logs to stderr.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int dispatch(std::span<const std::string> args);

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Provenance record written to <out>/manifest.json by every
/// artifact-producing run.
struct RunManifest {
  std::vector<std::string> command;  // argv without the program name
  std::string subcommand;
  std::string config_fingerprint;
  std::uint64_t seed = 0;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> artifacts;
  std::string started_at;
  std::string finished_at;
};

std::string to_json(const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

/// A checkpoint reference: an existing path, or a name under $PXRE_CACHE.
/// Throws IoError naming both candidates when neither exists.
std::filesystem::path resolve_checkpoint(const std::string& ref);

}  // namespace pxre::cli
