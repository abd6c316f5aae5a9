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

#include <stdexcept>
#include <string>

namespace pxre {

/// Base class for every domain error raised by the library. The CLI maps
/// these onto exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files, invalid instances, unknown labels.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Template parse failures and template invariant breaches.
class TemplateError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent experiment or model configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Shape, range, or numerical failures inside the model.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pxre
