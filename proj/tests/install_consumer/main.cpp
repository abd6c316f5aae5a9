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

#include <iostream>

#include "pxre/prompt_templates.hpp"

int main() {
  const pxre::RelationInstance inst{"c", "en", {"a", "b"}, {0, 1}, {1, 2}, "r", false};
  const auto pair = pxre::render(pxre::builtin_templates().get("Prompt_3"), inst);
  std::cout << pair.enc.joined() << "\n";
  return pair.enc.joined() == "<s> a b [MASK] a [MASK] b </s>" ? 0 : 1;
}
