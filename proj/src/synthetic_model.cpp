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

#include "textemp/synthetic_model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace textemp {

void SyntheticModelSpec::Validate() const {
  if (vocab < 2) throw std::invalid_argument("model vocab must be at least 2");
  if (vocab > 0xFFFFFFFEULL) throw std::invalid_argument("model vocab too large");
  if (!(logit_scale > 0.0) || !std::isfinite(logit_scale)) {
    throw std::invalid_argument("logit_scale must be positive and finite");
  }
  for (char c : name) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r' || c == ' ' || c == '\t') {
      throw std::invalid_argument("model name must not contain separators: '" +
                                  name + "'");
    }
  }
}

std::string SyntheticModelSpec::Id() const {
  if (!name.empty()) return name;
  char buf[128];
  std::snprintf(buf, sizeof buf, "synthetic-v%zu-o%zu-s%.9g-seed%llu", vocab,
                order, logit_scale, static_cast<unsigned long long>(seed));
  return buf;
}

SyntheticModel::SyntheticModel(SyntheticModelSpec spec) : spec_(std::move(spec)) {
  spec_.Validate();
  id_ = spec_.Id();
  base_key_ = Combine(Combine(Mix64(spec_.seed), spec_.vocab), spec_.order);
}

void SyntheticModel::FillLogits(std::span<const TokenId> context,
                                std::span<double> out) const {
  if (out.size() != spec_.vocab) {
    throw std::invalid_argument("output row has the wrong width");
  }
  std::uint64_t key = base_key_;
  const std::size_t order = spec_.order;
  // Oldest position first; missing positions are the start symbol.
  for (std::size_t j = 0; j < order; ++j) {
    const std::size_t back = order - j;
    std::uint64_t symbol = spec_.vocab;
    if (back <= context.size()) {
      const TokenId t = context[context.size() - back];
      if (t >= spec_.vocab) {
        throw std::invalid_argument("context token " + std::to_string(t) +
                                    " out of range for vocab " +
                                    std::to_string(spec_.vocab));
      }
      symbol = t;
    }
    key = Combine(key, symbol);
  }
  for (std::size_t l = 0; l < spec_.vocab; ++l) {
    out[l] = spec_.logit_scale * StandardNormal(key, l);
  }
}

std::vector<double> SyntheticModel::LogitsForContext(
    std::span<const TokenId> context) const {
  std::vector<double> row(spec_.vocab);
  FillLogits(context, row);
  return row;
}

SyntheticModel BuildModel(const SyntheticModelSpec& spec) { return SyntheticModel(spec); }

void GenerationConfig::Validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("generation temperature must be positive");
  }
  if (n_tokens < 1) throw std::invalid_argument("n_tokens must be at least 1");
}

TokenSequence GeneratedText::Continuation() const {
  const auto all = tokens.tokens();
  return TokenSequence(tokens.vocab(), {all.begin() + 1, all.end()});
}

TokenId SampleToken(std::span<const double> probs, double uniform) {
  if (probs.empty()) throw std::invalid_argument("empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("distribution has a negative or non-finite entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("distribution does not sum to 1");
  }
  if (!(uniform >= 0.0 && uniform < 1.0)) {
    throw std::invalid_argument("uniform draw must lie in [0, 1)");
  }
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t l = 0; l < probs.size(); ++l) {
    if (probs[l] > 0.0) last_positive = l;
    cumulative += probs[l];
    if (uniform < cumulative) return static_cast<TokenId>(l);
  }
  // Rounding left the total just below the draw.
  return static_cast<TokenId>(last_positive);
}

TokenId SampleToken(std::span<const double> probs, CounterRng& rng) {
  return SampleToken(probs, rng.NextUniform());
}

GeneratedText GenerateText(const SyntheticModel& model,
                           const GenerationConfig& config) {
  config.Validate();
  const std::size_t vocab = model.vocab();
  const Temperature t(config.temperature);
  CounterRng rng(config.seed);

  std::vector<TokenId> tokens;
  tokens.reserve(config.n_tokens + 1);
  tokens.push_back(static_cast<TokenId>(
      std::min<double>(std::floor(rng.NextUniform() * static_cast<double>(vocab)),
                       static_cast<double>(vocab - 1))));

  std::vector<double> logits;
  logits.reserve(config.n_tokens * vocab);
  std::vector<double> row(vocab);
  for (std::size_t i = 0; i < config.n_tokens; ++i) {
    model.FillLogits(tokens, row);
    const std::vector<double> p = TemperedSoftmax(row, t);
    tokens.push_back(SampleToken(p, rng));
    logits.insert(logits.end(), row.begin(), row.end());
  }

  GeneratedText text;
  text.tokens = TokenSequence(vocab, std::move(tokens));
  text.logits = LogitSequence(vocab, std::move(logits));
  text.gen_temperature = config.temperature;
  text.gen_seed = config.seed;
  text.model_id = model.id();
  return text;
}

LogitSequence ScoreText(const SyntheticModel& model, const TokenSequence& tokens) {
  if (tokens.size() < 2) {
    throw std::invalid_argument("scoring needs at least two tokens");
  }
  const std::size_t vocab = model.vocab();
  if (tokens.vocab() != vocab) {
    throw std::invalid_argument("vocabulary mismatch: text vocab " +
                                std::to_string(tokens.vocab()) +
                                ", scoring model vocab " + std::to_string(vocab));
  }
  const auto all = tokens.tokens();
  std::vector<double> values((tokens.size() - 1) * vocab);
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    model.FillLogits(all.first(i),
                     std::span<double>(values).subspan((i - 1) * vocab, vocab));
  }
  return LogitSequence(vocab, std::move(values));
}

}  // namespace textemp
