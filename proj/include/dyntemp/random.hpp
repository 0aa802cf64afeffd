// Copyright 2026 The dyntemp Authors
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

namespace dyntemp {

/// SplitMix64 finalizer. Full avalanche: every input bit affects every output bit.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for sample `sample` of instance `instance` under `master`.
///
///   derive_seed(m, i, s) = mix64(mix64(mix64(m) ^ i) ^ s)
///
/// Depends only on the three indices, so evaluation order never changes results.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t instance,
                                    std::uint64_t sample) noexcept {
  return mix64(mix64(mix64(master) ^ instance) ^ sample);
}

/// Seeded uniform stream. The engine (mt19937_64) and the double conversion are
/// both fully specified, so draws are identical on every conforming platform;
/// std::uniform_real_distribution is not used for that reason.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dyntemp
