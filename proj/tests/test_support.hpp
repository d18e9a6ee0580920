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

// Random instance generators and reference implementations used only by
// tests. The oracles deliberately avoid the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "textemp/estimation.hpp"

namespace textemp::testing {

struct Instance {
  LogitSequence logits;
  TokenSequence tokens;
};

// Logits ~ N(0, scale^2); observed tokens drawn from the softmax at
// `temperature` so that most instances have an interior root.
inline Instance RandomInstance(std::mt19937_64& rng, std::size_t max_vocab,
                               std::size_t max_steps, double scale = 3.0,
                               double temperature = 1.0) {
  std::uniform_int_distribution<std::size_t> vocab_dist(2, max_vocab);
  std::uniform_int_distribution<std::size_t> steps_dist(1, max_steps);
  std::normal_distribution<double> normal(0.0, scale);
  const std::size_t vocab = vocab_dist(rng);
  const std::size_t steps = steps_dist(rng);
  std::vector<double> values;
  std::vector<TokenId> tokens;
  for (std::size_t i = 0; i < steps; ++i) {
    std::vector<double> row(vocab);
    for (double& u : row) u = normal(rng);
    std::vector<double> w(vocab);
    const double m = *std::max_element(row.begin(), row.end());
    for (std::size_t l = 0; l < vocab; ++l) w[l] = std::exp((row[l] - m) / temperature);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    tokens.push_back(static_cast<TokenId>(pick(rng)));
    values.insert(values.end(), row.begin(), row.end());
  }
  return {LogitSequence(vocab, std::move(values)), TokenSequence(vocab, std::move(tokens))};
}

inline Instance MakeInstance(std::size_t vocab, std::vector<double> values,
                             std::vector<TokenId> tokens) {
  return {LogitSequence(vocab, std::move(values)), TokenSequence(vocab, std::move(tokens))};
}

// Straightforward evaluation of sum_i (E[u^(i)] - u_obs^(i)) in long double.
inline long double NaiveResidual(const LogitSequence& logits, const TokenSequence& tokens,
                                 long double beta) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto row = logits.row(i);
    long double m = row[0];
    for (double u : row) m = std::max<long double>(m, u);
    long double z = 0.0L;
    long double e = 0.0L;
    for (double u : row) {
      const long double w = std::exp(beta * (static_cast<long double>(u) - m));
      z += w;
      e += w * u;
    }
    total += e / z - static_cast<long double>(row[tokens[i]]);
  }
  return total;
}

// 200 halvings of [lo, hi] on the naive residual. Returns the midpoint.
inline double BisectionOracle(const LogitSequence& logits, const TokenSequence& tokens,
                              double lo = 1e-2, double hi = 1e4) {
  long double a = lo;
  long double b = hi;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (a + b);
    if (NaiveResidual(logits, tokens, mid) <= 0.0L) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return static_cast<double>(0.5L * (a + b));
}

// Log-likelihood from the definition, one softmax per step in long double.
inline long double NaiveLogLikelihood(const LogitSequence& logits,
                                      const TokenSequence& tokens, long double t) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto row = logits.row(i);
    long double m = row[0];
    for (double u : row) m = std::max<long double>(m, u);
    long double z = 0.0L;
    for (double u : row) z += std::exp((u - m) / t);
    total += (row[tokens[i]] - m) / t - std::log(z);
  }
  return total;
}

inline double RelativeError(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace textemp::testing
