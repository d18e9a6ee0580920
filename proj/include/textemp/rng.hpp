// Copyright 2026 The textemp Authors.
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

// Portable counter-based pseudo-random scheme. The exact algorithm is part of
// the reproducibility contract (see docs/rng.md); changing any constant here
// changes every synthetic model and every experiment output.

#include <cstdint>

namespace textemp {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function (Steele, Lea and Flood).
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Folds `value` into the running key `h`.
constexpr std::uint64_t Combine(std::uint64_t h, std::uint64_t value) {
  return Mix64(h ^ Mix64(value + kGoldenGamma));
}

// Element `index` (0-based) of the SplitMix64 stream seeded with `key`.
constexpr std::uint64_t StreamAt(std::uint64_t key, std::uint64_t index) {
  return Mix64(key + (index + 1) * kGoldenGamma);
}

// Top 53 bits as a double in [0, 1).
constexpr double ToUnit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard normal draw number `index` from the stream `key` (Box-Muller,
// cosine branch, consuming stream elements 2*index and 2*index + 1).
double StandardNormal(std::uint64_t key, std::uint64_t index);

// Sequential view of a SplitMix64 stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t NextU64() { return StreamAt(key_, counter_++); }
  double NextUniform() { return ToUnit(NextU64()); }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace textemp
