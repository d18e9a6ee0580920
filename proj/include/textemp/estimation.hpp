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

// Numerical kernels for tempered softmax and the maximum-likelihood
// temperature condition.
//
// Everything here is a pure function of its arguments. All sums are carried
// out in double precision after subtracting the per-step maximum logit, so any
// finite logits are safe at any positive temperature.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace textemp {

using TokenId = std::uint32_t;

// Positive, finite temperature. Construction throws std::invalid_argument
// otherwise.
class Temperature {
 public:
  explicit Temperature(double value);

  static Temperature FromBeta(double beta);

  double value() const { return value_; }
  double beta() const { return 1.0 / value_; }

 private:
  double value_;
};

// Per-step logit rows u^(i), stored row-major. Every row has exactly `vocab`
// finite entries.
class LogitSequence {
 public:
  LogitSequence() = default;
  LogitSequence(std::size_t vocab, std::vector<double> values);

  std::size_t vocab() const { return vocab_; }
  std::size_t size() const { return vocab_ == 0 ? 0 : values_.size() / vocab_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> row(std::size_t step) const {
    return {values_.data() + step * vocab_, vocab_};
  }
  std::span<const double> values() const { return values_; }

  // Appends one row; throws if its width or contents are invalid.
  void push_back(std::span<const double> row);

  friend bool operator==(const LogitSequence&, const LogitSequence&) = default;

 private:
  std::size_t vocab_ = 0;
  std::vector<double> values_;
};

// Observed token ids t^(i), each in [0, vocab).
class TokenSequence {
 public:
  TokenSequence() = default;
  TokenSequence(std::size_t vocab, std::vector<TokenId> tokens);

  std::size_t vocab() const { return vocab_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  TokenId operator[](std::size_t i) const { return tokens_[i]; }
  std::span<const TokenId> tokens() const { return tokens_; }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::size_t vocab_ = 0;
  std::vector<TokenId> tokens_;
};

// Throws std::invalid_argument unless the two sequences are non-empty and have
// equal length and vocabulary.
void CheckAligned(const LogitSequence& logits, const TokenSequence& tokens);

// p_l = exp(u_l / T) / sum_k exp(u_k / T).
std::vector<double> TemperedSoftmax(std::span<const double> logits,
                                    Temperature t);

// E[u | T] = sum_l u_l p_l. Always within [min u, max u].
double ExpectedLogit(std::span<const double> logits, Temperature t);

// Var[u | T] under the tempered distribution; this is dE/dbeta.
double StepVariance(std::span<const double> logits, Temperature t);

// Log-probability of `observed` at temperature T, via log-sum-exp.
double StepLogProbability(std::span<const double> logits, TokenId observed,
                          Temperature t);

// sum_i log p(t^(i) | u^(i), T).
double LogLikelihood(const LogitSequence& logits, const TokenSequence& tokens,
                     Temperature t);

// R(beta) = sum_i E[u^(i) | T = 1/beta] - sum_i u_obs^(i).
//
// Nondecreasing in beta; its root is the maximum-likelihood estimate. Each
// step's contribution is accumulated as sum_l p_l (u_l - u_obs), which is
// exactly zero for a step whose logits are all equal.
double Residual(const LogitSequence& logits, const TokenSequence& tokens,
                double beta);

// True when every entry of the row is equal.
bool IsDegenerate(std::span<const double> logits);

}  // namespace textemp
