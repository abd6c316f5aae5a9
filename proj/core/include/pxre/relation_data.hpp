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

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pxre {

/// Half-open token range [start, end).
struct Span {
  int start = 0;
  int end = 0;

  int size() const { return end - start; }
  bool empty() const { return end <= start; }
  bool operator==(const Span&) const = default;
};

/// One sentence with an ordered entity pair and its relation label.
///
/// `label_only` marks instances whose entities could not be located in the
/// sentence; they carry the sentinel spans [0,0) and can only be rendered by
/// templates that never reference an entity slot.
struct RelationInstance {
  std::string id;
  std::string lang;
  std::vector<std::string> tokens;
  Span subj;
  Span obj;
  std::string label;
  bool label_only = false;

  std::vector<std::string> subj_tokens() const;
  std::vector<std::string> obj_tokens() const;
  std::string subj_text() const;
  std::string obj_text() const;

  bool operator==(const RelationInstance&) const = default;
};

/// Ordered set of relation labels; position in the list is the class index.
class LabelSpace {
 public:
  LabelSpace() = default;
  /// Throws DataError on duplicate labels.
  explicit LabelSpace(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& at(std::size_t index) const { return labels_.at(index); }
  bool contains(std::string_view label) const;
  std::optional<std::size_t> find(std::string_view label) const;
  /// Throws DataError when the label is not a member.
  std::size_t index_of(std::string_view label) const;

  bool operator==(const LabelSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Split { kTrain, kDev, kTest };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

struct Dataset {
  std::string name;
  std::string lang;
  Split split = Split::kTest;
  std::vector<RelationInstance> instances;
  LabelSpace label_space;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }
};

struct Violation {
  std::string instance_id;
  std::string message;
};

/// Checks a single instance's own invariants (span bounds, non-empty
/// spans, label membership). Returns the first failure, if any.
std::optional<std::string> check_instance(const RelationInstance& instance,
                                          const LabelSpace* label_space);

/// Reads one-instance-per-line JSONL. With no label space given the label
/// space is the sorted set of observed labels. Name and split default to the
/// parent directory name and the file stem (when the stem names a split).
Dataset load_jsonl(const std::filesystem::path& path,
                   const std::optional<LabelSpace>& label_space = std::nullopt);

/// Stream form of load_jsonl; `source` is used in error messages.
Dataset parse_jsonl(std::istream& in, std::string_view source,
                    const std::optional<LabelSpace>& label_space = std::nullopt);

/// Canonical single-line JSON encoding with fixed key order.
std::string to_json_line(const RelationInstance& instance);
RelationInstance instance_from_json_line(std::string_view line);

/// Canonical JSONL encoding of every instance, each line '\n'-terminated.
std::string to_jsonl(const Dataset& dataset);
void write_jsonl(const std::filesystem::path& path, const Dataset& dataset);

/// Lists every invariant violation; empty iff the dataset is well formed.
std::vector<Violation> validate(const Dataset& dataset);

struct SplitKey {
  std::string name;
  std::string lang;
  Split split = Split::kTest;

  auto operator<=>(const SplitKey&) const = default;
};

std::map<SplitKey, std::size_t> split_counts(std::span<const Dataset> datasets);

/// Loads every *.jsonl below a directory, sorted by path.
std::vector<Dataset> load_directory(const std::filesystem::path& dir);

}  // namespace pxre
