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

#include "textemp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace textemp {
namespace {

void CheckRow(std::span<const double> logits) {
  if (logits.empty()) {
    throw std::invalid_argument("logit vector is empty");
  }
  for (double u : logits) {
    if (!std::isfinite(u)) {
      throw std::invalid_argument("logit vector contains a non-finite value");
    }
  }
}

double MaxOf(std::span<const double> logits) {
  return *std::max_element(logits.begin(), logits.end());
}

void CheckBeta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("inverse temperature must be positive and finite, got " +
                                std::to_string(beta));
  }
}

}  // namespace

Temperature::Temperature(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("temperature must be positive and finite, got " +
                                std::to_string(value));
  }
}

Temperature Temperature::FromBeta(double beta) {
  CheckBeta(beta);
  return Temperature(1.0 / beta);
}

LogitSequence::LogitSequence(std::size_t vocab, std::vector<double> values)
    : vocab_(vocab), values_(std::move(values)) {
  if (vocab_ == 0) throw std::invalid_argument("vocab must be positive");
  if (values_.size() % vocab_ != 0) {
    throw std::invalid_argument("logit payload is not a whole number of rows");
  }
  for (double u : values_) {
    if (!std::isfinite(u)) {
      throw std::invalid_argument("logit sequence contains a non-finite value");
    }
  }
}

void LogitSequence::push_back(std::span<const double> row) {
  if (vocab_ == 0) {
    if (row.empty()) throw std::invalid_argument("logit vector is empty");
    vocab_ = row.size();
  }
  if (row.size() != vocab_) {
    throw std::invalid_argument("logit row has " + std::to_string(row.size()) +
                                " entries, expected " + std::to_string(vocab_));
  }
  CheckRow(row);
  values_.insert(values_.end(), row.begin(), row.end());
}

TokenSequence::TokenSequence(std::size_t vocab, std::vector<TokenId> tokens)
    : vocab_(vocab), tokens_(std::move(tokens)) {
  if (vocab_ == 0) throw std::invalid_argument("vocab must be positive");
  for (TokenId t : tokens_) {
    if (t >= vocab_) {
      throw std::invalid_argument("token id " + std::to_string(t) +
                                  " out of range for vocab " +
                                  std::to_string(vocab_));
    }
  }
}

void CheckAligned(const LogitSequence& logits, const TokenSequence& tokens) {
  if (logits.empty() || tokens.empty()) {
    throw std::invalid_argument("estimation needs at least one step");
  }
  if (logits.size() != tokens.size()) {
    throw std::invalid_argument("logit rows (" + std::to_string(logits.size()) +
                                ") and tokens (" + std::to_string(tokens.size()) +
                                ") differ in length");
  }
  if (logits.vocab() != tokens.vocab()) {
    throw std::invalid_argument("logit vocab (" + std::to_string(logits.vocab()) +
                                ") and token vocab (" +
                                std::to_string(tokens.vocab()) + ") differ");
  }
}

std::vector<double> TemperedSoftmax(std::span<const double> logits,
                                    Temperature t) {
  CheckRow(logits);
  const double max_logit = MaxOf(logits);
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t l = 0; l < logits.size(); ++l) {
    p[l] = std::exp((logits[l] - max_logit) / t.value());
    z += p[l];
  }
  for (double& x : p) x /= z;
  return p;
}

double ExpectedLogit(std::span<const double> logits, Temperature t) {
  CheckRow(logits);
  const double max_logit = MaxOf(logits);
  double z = 0.0;
  double shifted = 0.0;
  for (double u : logits) {
    const double w = std::exp((u - max_logit) / t.value());
    z += w;
    shifted += w * (u - max_logit);
  }
  const double e = max_logit + shifted / z;
  const auto [lo, hi] = std::minmax_element(logits.begin(), logits.end());
  return std::clamp(e, *lo, *hi);
}

double StepVariance(std::span<const double> logits, Temperature t) {
  CheckRow(logits);
  const std::vector<double> p = TemperedSoftmax(logits, t);
  const double max_logit = MaxOf(logits);
  // Two-pass form around the mean avoids cancellation in E[u^2] - E[u]^2.
  double mean = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) mean += p[l] * (logits[l] - max_logit);
  double var = 0.0;
  for (std::size_t l = 0; l < p.size(); ++l) {
    const double d = (logits[l] - max_logit) - mean;
    var += p[l] * d * d;
  }
  return var;
}

double StepLogProbability(std::span<const double> logits, TokenId observed,
                          Temperature t) {
  CheckRow(logits);
  if (observed >= logits.size()) {
    throw std::invalid_argument("observed token out of range");
  }
  const double max_logit = MaxOf(logits);
  double z = 0.0;
  for (double u : logits) z += std::exp((u - max_logit) / t.value());
  return (logits[observed] - max_logit) / t.value() - std::log(z);
}

double LogLikelihood(const LogitSequence& logits, const TokenSequence& tokens,
                     Temperature t) {
  CheckAligned(logits, tokens);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    total += StepLogProbability(logits.row(i), tokens[i], t);
  }
  return total;
}

double Residual(const LogitSequence& logits, const TokenSequence& tokens,
                double beta) {
  CheckAligned(logits, tokens);
  CheckBeta(beta);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const std::span<const double> row = logits.row(i);
    const double max_logit = MaxOf(row);
    const double observed = row[tokens[i]];
    double z = 0.0;
    double excess = 0.0;
    for (double u : row) {
      const double w = std::exp(beta * (u - max_logit));
      z += w;
      excess += w * (u - observed);
    }
    total += excess / z;
  }
  return total;
}

bool IsDegenerate(std::span<const double> logits) {
  return std::adjacent_find(logits.begin(), logits.end(),
                            std::not_equal_to<>()) == logits.end();
}

}  // namespace textemp
