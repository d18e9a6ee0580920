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

#include "textemp/rng.hpp"

#include <cmath>
#include <numbers>

namespace textemp {

double StandardNormal(std::uint64_t key, std::uint64_t index) {
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = 1.0 - ToUnit(StreamAt(key, 2 * index));
  const double u2 = ToUnit(StreamAt(key, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace textemp
