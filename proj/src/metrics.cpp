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

#include "textemp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace textemp {
namespace {

void CheckPair(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty()) throw std::invalid_argument("metric inputs are empty");
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("metric inputs differ in length");
  }
}

bool IsConstant(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo == *hi;
}

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double Mae(std::span<const double> xs, std::span<const double> ys) {
  CheckPair(xs, ys);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) s += std::abs(xs[i] - ys[i]);
  return s / static_cast<double>(xs.size());
}

double R2(std::span<const double> xs, std::span<const double> ys) {
  CheckPair(xs, ys);
  if (IsConstant(ys)) throw std::domain_error("R^2 undefined for constant targets");
  const double my = Mean(ys);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ss_res += (ys[i] - xs[i]) * (ys[i] - xs[i]);
    ss_tot += (ys[i] - my) * (ys[i] - my);
  }
  return 1.0 - ss_res / ss_tot;
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  CheckPair(xs, ys);
  if (IsConstant(xs) || IsConstant(ys)) {
    throw std::domain_error("correlation undefined for constant input");
  }
  const double mx = Mean(xs);
  const double my = Mean(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace textemp
