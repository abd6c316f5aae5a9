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
#include <random>
#include <utility>
#include <vector>

namespace pxre {

/// Seeded pseudo-random source. Built on std::mt19937_64, whose output
/// sequence is fixed by the standard; every derived draw (uniform,
/// bounded integer, normal, Poisson, shuffle) uses an explicit algorithm
/// here instead of the implementation-defined <random> distributions, so
/// a given seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

  /// Poisson draw with the given mean (Knuth's multiplication method).
  int poisson(double mean);

  /// Derives an independent child seed; used to fan one experiment seed
  /// out to initialization, dropout, shuffling and noise streams.
  std::uint64_t fork() { return next() ^ 0x9e3779b97f4a7c15ULL; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pxre
