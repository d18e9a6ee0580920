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

// Seeded order-k logit-table models and temperature sampling.
//
// A model maps the last `order` tokens of a context to a row of `vocab`
// logits. Rows are never stored: each one is regenerated on demand from a hash
// of (seed, vocab, order, context), so models of any order take O(1) memory.
// Contexts shorter than `order` are left-padded with the start symbol, whose
// id is `vocab`.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "textemp/estimation.hpp"
#include "textemp/rng.hpp"

namespace textemp {

struct SyntheticModelSpec {
  std::size_t vocab = 128;
  std::size_t order = 1;
  // Standard deviation of the table entries.
  double logit_scale = 3.0;
  std::uint64_t seed = 0;
  // Optional display name; when empty the id is derived from the fields.
  std::string name;

  void Validate() const;
  std::string Id() const;
};

class SyntheticModel {
 public:
  explicit SyntheticModel(SyntheticModelSpec spec);

  const SyntheticModelSpec& spec() const { return spec_; }
  const std::string& id() const { return id_; }
  std::size_t vocab() const { return spec_.vocab; }

  // Logit row for the next token after `context`.
  std::vector<double> LogitsForContext(std::span<const TokenId> context) const;
  void FillLogits(std::span<const TokenId> context, std::span<double> out) const;

 private:
  SyntheticModelSpec spec_;
  std::string id_;
  std::uint64_t base_key_;
};

SyntheticModel BuildModel(const SyntheticModelSpec& spec);

struct GenerationConfig {
  double temperature = 1.0;
  std::size_t n_tokens = 200;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct GeneratedText {
  // Start token followed by n_tokens sampled continuation tokens.
  TokenSequence tokens;
  // One row per continuation token; the start token has no row.
  LogitSequence logits;
  double gen_temperature = 1.0;
  std::uint64_t gen_seed = 0;
  std::string model_id;

  // tokens[1..], aligned with `logits`.
  TokenSequence Continuation() const;
};

// Inverse-CDF draw: the first index whose cumulative probability exceeds
// `uniform` (in [0, 1)). Throws std::invalid_argument unless `probs` is a
// distribution summing to 1 within 1e-9.
TokenId SampleToken(std::span<const double> probs, double uniform);
TokenId SampleToken(std::span<const double> probs, CounterRng& rng);

// Draws a uniform start token from the seeded stream, then samples n_tokens
// continuation tokens from the tempered model distribution.
GeneratedText GenerateText(const SyntheticModel& model,
                           const GenerationConfig& config);

// Logit rows for tokens[1..] under `model`, each conditioned on the preceding
// tokens. Throws std::invalid_argument on fewer than two tokens or when the
// text's vocabulary differs from the model's.
LogitSequence ScoreText(const SyntheticModel& model, const TokenSequence& tokens);

}  // namespace textemp
