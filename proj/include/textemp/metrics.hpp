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

#include <span>

namespace textemp {

// Goodness-of-fit between predictions `xs` and targets `ys`. All three throw
// std::invalid_argument on empty or unequal-length inputs.

// mean |x - y|
double Mae(std::span<const double> xs, std::span<const double> ys);

// 1 - sum (y - x)^2 / sum (y - mean y)^2. Throws std::domain_error when ys is
// constant.
double R2(std::span<const double> xs, std::span<const double> ys);

// Sample correlation. Throws std::domain_error when either input is constant.
double Pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace textemp
