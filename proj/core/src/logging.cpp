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

#include "pxre/logging.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "json.hpp"

namespace pxre::log {
namespace {

std::atomic<bool> g_json{false};
std::atomic<int> g_min_level{static_cast<int>(Level::kInfo)};
std::mutex g_mutex;

const char* level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

}  // namespace

void set_json(bool enabled) { g_json = enabled; }
void set_min_level(Level level) { g_min_level = static_cast<int>(level); }

void write(Level level, std::string_view message, const Fields& fields) {
  if (static_cast<int>(level) < g_min_level) return;
  std::string line;
  if (g_json) {
    nlohmann::ordered_json obj;
    obj["level"] = level_name(level);
    obj["msg"] = message;
    for (const auto& [key, value] : fields) obj[key] = value;
    line = obj.dump();
  } else {
    line = std::string("[") + level_name(level) + "] " + std::string(message);
    for (const auto& [key, value] : fields) line += " " + key + "=" + value;
  }
  std::lock_guard lock(g_mutex);
  std::cerr << line << '\n';
}

}  // namespace pxre::log
