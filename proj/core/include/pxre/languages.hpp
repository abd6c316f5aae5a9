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

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace pxre {

/// Registered language codes, each owning a reserved id token such as
/// "[EN]". Order is significant: it fixes the id-token vocabulary ids.
class LanguageRegistry {
 public:
  LanguageRegistry() : codes_{"en", "zh", "ar"} {}
  explicit LanguageRegistry(std::vector<std::string> codes) : codes_(std::move(codes)) {}

  const std::vector<std::string>& codes() const { return codes_; }
  bool contains(std::string_view code) const {
    return std::find(codes_.begin(), codes_.end(), code) != codes_.end();
  }
  void add(std::string code) {
    if (!contains(code)) codes_.push_back(std::move(code));
  }
  std::string listing() const {
    std::string out;
    for (const auto& c : codes_) {
      if (!out.empty()) out += ", ";
      out += c;
    }
    return out;
  }

  static std::string id_token(std::string_view code) {
    std::string out = "[";
    for (char c : code) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    out += "]";
    return out;
  }

  bool operator==(const LanguageRegistry&) const = default;

 private:
  std::vector<std::string> codes_;
};

}  // namespace pxre
