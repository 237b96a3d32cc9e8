// Copyright 2026 The partrace Authors
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

// Counter-based random streams. The bit-exact definition is in docs/rng.md;
// nothing here depends on the platform's <random> engines or distributions.

#ifndef PARTRACE_RNG_H_
#define PARTRACE_RNG_H_

#include <cstdint>
#include <string_view>

namespace partrace {

inline constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output finalizer; a bijection on 64-bit words.
constexpr uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Injective in `index` for a fixed master (mix64 is a bijection and the
// pre-image master + (index + 1) * kGolden is distinct modulo 2^64).
constexpr uint64_t derive_seed(uint64_t master_seed, uint64_t index) {
  return mix64(master_seed + (index + 1) * kGolden);
}

// FNV-1a, 64-bit.
constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

class Stream {
 public:
  Stream(uint64_t seed, uint64_t key) : base_(seed ^ mix64(key + kGolden)) {}

  uint64_t next_u64() { return mix64(base_ + (++counter_) * kGolden); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal by the Marsaglia polar method (one value per accepted pair).
  double normal();
  uint64_t draws() const { return counter_; }

 private:
  uint64_t base_;
  uint64_t counter_ = 0;
};

}  // namespace partrace

#endif  // PARTRACE_RNG_H_
