// Copyright 2026 The RUAS Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ruas {

/// Deterministic random source. The raw stream is std::mt19937_64 (fully
/// specified by the standard); all value transforms are hand-rolled so that
/// sequences are identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n);

  /// Standard normal via Box-Muller (deterministic, one draw per call).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Fisher-Yates shuffle of indices 0..n-1.
  std::vector<size_t> permutation(size_t n);

  /// Derive an independent stream, e.g. per epoch or per image. Stateless:
  /// the parent is not advanced, so fork(k) always yields the same stream.
  Rng fork(uint64_t stream) const {
    std::mt19937_64 copy = engine_;
    return Rng(copy() ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a 64-bit hash; used for dataset splits and config fingerprints.
uint64_t fnv1a(const std::string& s);

}  // namespace ruas
