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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "textemp/rng.hpp"
#include "textemp/solver.hpp"

namespace textemp {
namespace {

SyntheticModelSpec Spec(std::size_t vocab, std::size_t order, double scale,
                        std::uint64_t seed) {
  SyntheticModelSpec spec;
  spec.vocab = vocab;
  spec.order = order;
  spec.logit_scale = scale;
  spec.seed = seed;
  return spec;
}

TEST(RngTest, GoldenValues) {
  // First outputs of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(StreamAt(0, 0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(StreamAt(0, 1), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(StreamAt(0, 2), 0x06c45d188009454fULL);
  EXPECT_EQ(Mix64(0), 0u);
  EXPECT_EQ(Mix64(1), 0x5692161d100b05e5ULL);
  EXPECT_EQ(Combine(1, 2), 0xf2826f98653e9e57ULL);
}

TEST(RngTest, CounterRngWalksTheStream) {
  CounterRng rng(42);
  for (std::uint64_t i = 0; i < 5; ++i) EXPECT_EQ(rng.NextU64(), StreamAt(42, i));
  EXPECT_EQ(rng.counter(), 5u);
  EXPECT_EQ(rng.NextUniform(), ToUnit(StreamAt(42, 5)));
}

TEST(RngTest, UnitAndNormalMoments) {
  EXPECT_EQ(ToUnit(0), 0.0);
  EXPECT_LT(ToUnit(~0ULL), 1.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const double z = StandardNormal(7, i);
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / kDraws, 0.0, 0.02);
  EXPECT_NEAR(sum_sq / kDraws, 1.0, 0.02);
}

TEST(SyntheticModelTest, GoldenLogits) {
  // Seed 1, vocab 4, order 1, scale 3, from an independent reimplementation.
  const SyntheticModel model(Spec(4, 1, 3.0, 1));
  const std::vector<TokenId> zero = {0};
  const std::vector<TokenId> three = {2, 3};
  const std::vector<double> after_zero = {-0.44079607967719253, -6.1393945424131307,
                                          -0.94855645735280159, 1.9417729408022315};
  const std::vector<double> after_three = {-2.092601323120701, -1.2808160947121616,
                                           -0.92686649672705856, -0.56986957329596966};
  const std::vector<double> at_start = {2.0217964002268869, 0.44986709435666045,
                                        -4.1199971533916688, -1.067609160653066};
  const auto check = [](const std::vector<double>& got, const std::vector<double>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t l = 0; l < got.size(); ++l) EXPECT_NEAR(got[l], want[l], 1e-12);
  };
  check(model.LogitsForContext(zero), after_zero);
  check(model.LogitsForContext(three), after_three);
  check(model.LogitsForContext({}), at_start);
}

TEST(SyntheticModelTest, Deterministic) {
  const SyntheticModel a(Spec(64, 2, 3.0, 9));
  const SyntheticModel b(Spec(64, 2, 3.0, 9));
  const std::vector<TokenId> ctx = {5, 17, 3};
  EXPECT_EQ(a.LogitsForContext(ctx), b.LogitsForContext(ctx));
  EXPECT_EQ(a.id(), b.id());
}

TEST(SyntheticModelTest, SeedChangesTable) {
  const std::vector<TokenId> ctx = {1};
  EXPECT_NE(SyntheticModel(Spec(16, 1, 3.0, 1)).LogitsForContext(ctx),
            SyntheticModel(Spec(16, 1, 3.0, 2)).LogitsForContext(ctx));
}

TEST(SyntheticModelTest, DoublingScaleDoublesLogits) {
  const SyntheticModel a(Spec(32, 1, 1.5, 4));
  const SyntheticModel b(Spec(32, 1, 3.0, 4));
  for (TokenId c = 0; c < 32; ++c) {
    const std::vector<TokenId> ctx = {c};
    const auto ra = a.LogitsForContext(ctx);
    const auto rb = b.LogitsForContext(ctx);
    for (std::size_t l = 0; l < ra.size(); ++l) EXPECT_EQ(2.0 * ra[l], rb[l]);
  }
}

TEST(SyntheticModelTest, OrderZeroIgnoresContext) {
  const SyntheticModel model(Spec(16, 0, 3.0, 3));
  const auto base = model.LogitsForContext({});
  for (TokenId c = 0; c < 16; ++c) {
    const std::vector<TokenId> ctx = {7, c};
    EXPECT_EQ(model.LogitsForContext(ctx), base);
  }
}

TEST(SyntheticModelTest, OrderOneSeesOnlyLastToken) {
  const SyntheticModel model(Spec(16, 1, 3.0, 3));
  const std::vector<TokenId> a = {1, 2, 9};
  const std::vector<TokenId> b = {4, 9};
  const std::vector<TokenId> c = {9, 1};
  EXPECT_EQ(model.LogitsForContext(a), model.LogitsForContext(b));
  EXPECT_NE(model.LogitsForContext(a), model.LogitsForContext(c));
}

TEST(SyntheticModelTest, OrderTwoPadsWithStartSymbol) {
  const SyntheticModel model(Spec(16, 2, 3.0, 3));
  const std::vector<TokenId> one = {5};
  const std::vector<TokenId> two = {0, 5};
  const std::vector<TokenId> other = {1, 5};
  EXPECT_NE(model.LogitsForContext(one), model.LogitsForContext(two));
  EXPECT_NE(model.LogitsForContext(two), model.LogitsForContext(other));
}

TEST(SyntheticModelTest, TableMomentsMatchScale) {
  const SyntheticModel model(Spec(128, 1, 3.0, 11));
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (TokenId c = 0; c < 128; ++c) {
    const std::vector<TokenId> ctx = {c};
    for (double u : model.LogitsForContext(ctx)) {
      sum += u;
      sum_sq += u * u;
      ++n;
    }
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.1);
  EXPECT_NEAR(std::sqrt(sum_sq / n - mean * mean), 3.0, 0.1);
}

TEST(SyntheticModelTest, SpecValidation) {
  EXPECT_THROW(SyntheticModel(Spec(1, 1, 3.0, 0)), std::invalid_argument);
  EXPECT_THROW(SyntheticModel(Spec(8, 1, 0.0, 0)), std::invalid_argument);
  EXPECT_THROW(SyntheticModel(Spec(8, 1, -1.0, 0)), std::invalid_argument);
  SyntheticModelSpec named = Spec(8, 1, 1.0, 0);
  named.name = "a,b";
  EXPECT_THROW(SyntheticModel{named}, std::invalid_argument);
  named.name = "small";
  EXPECT_EQ(SyntheticModel(named).id(), "small");
  EXPECT_EQ(SyntheticModel(Spec(8, 1, 1.5, 3)).id(), "synthetic-v8-o1-s1.5-seed3");
}

TEST(SyntheticModelTest, ContextTokenOutOfRange) {
  const SyntheticModel model(Spec(8, 1, 1.0, 0));
  const std::vector<TokenId> ctx = {8};
  EXPECT_THROW(model.LogitsForContext(ctx), std::invalid_argument);
}

TEST(SampleTokenTest, InverseCdf) {
  const std::vector<double> p = {0.2, 0.5, 0.3};
  EXPECT_EQ(SampleToken(p, 0.0), 0u);
  EXPECT_EQ(SampleToken(p, 0.19), 0u);
  EXPECT_EQ(SampleToken(p, 0.2), 1u);
  EXPECT_EQ(SampleToken(p, 0.69), 1u);
  EXPECT_EQ(SampleToken(p, 0.7), 2u);
  EXPECT_EQ(SampleToken(p, 0.999999), 2u);
  const std::vector<double> trailing_zero = {0.5, 0.5, 0.0};
  EXPECT_EQ(SampleToken(trailing_zero, std::nextafter(1.0, 0.0)), 1u);
}

TEST(SampleTokenTest, RejectsBadInput) {
  const std::vector<double> p = {0.2, 0.5, 0.3};
  EXPECT_THROW(SampleToken(p, 1.0), std::invalid_argument);
  EXPECT_THROW(SampleToken(p, -0.1), std::invalid_argument);
  EXPECT_THROW(SampleToken(std::vector<double>{0.5, 0.4}, 0.1), std::invalid_argument);
  EXPECT_THROW(SampleToken(std::vector<double>{1.5, -0.5}, 0.1), std::invalid_argument);
  EXPECT_THROW(SampleToken(std::vector<double>{}, 0.1), std::invalid_argument);
}

TEST(SampleTokenTest, FrequenciesWithinThreeSigma) {
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  CounterRng rng(2024);
  constexpr int kDraws = 100000;
  std::vector<int> counts(p.size());
  for (int i = 0; i < kDraws; ++i) ++counts[SampleToken(p, rng)];
  for (std::size_t l = 0; l < p.size(); ++l) {
    const double sigma = std::sqrt(kDraws * p[l] * (1 - p[l]));
    EXPECT_NEAR(counts[l], kDraws * p[l], 3 * sigma) << "token " << l;
  }
}

TEST(GenerateTextTest, ShapeAndDeterminism) {
  const SyntheticModel model(Spec(32, 1, 3.0, 5));
  GenerationConfig config;
  config.temperature = 0.8;
  config.n_tokens = 50;
  config.seed = 77;
  const GeneratedText a = GenerateText(model, config);
  const GeneratedText b = GenerateText(model, config);
  EXPECT_EQ(a.tokens.size(), 51u);
  EXPECT_EQ(a.logits.size(), 50u);
  EXPECT_EQ(a.Continuation().size(), 50u);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.model_id, model.id());
  EXPECT_EQ(a.gen_temperature, 0.8);
  config.seed = 78;
  EXPECT_NE(GenerateText(model, config).tokens, a.tokens);
}

TEST(GenerateTextTest, RecordedLogitsMatchScoring) {
  const SyntheticModel model(Spec(64, 2, 3.0, 6));
  GenerationConfig config;
  config.n_tokens = 100;
  config.seed = 3;
  const GeneratedText text = GenerateText(model, config);
  EXPECT_EQ(ScoreText(model, text.tokens), text.logits);
}

TEST(GenerateTextTest, VeryLowTemperatureIsGreedy) {
  const SyntheticModel model(Spec(128, 1, 3.0, 8));
  GenerationConfig config;
  config.temperature = 0.001;
  config.seed = 12;
  const GeneratedText text = GenerateText(model, config);
  for (std::size_t i = 0; i < text.logits.size(); ++i) {
    const auto row = text.logits.row(i);
    const auto argmax = std::max_element(row.begin(), row.end()) - row.begin();
    EXPECT_EQ(text.tokens[i + 1], static_cast<TokenId>(argmax)) << "step " << i;
  }
}

TEST(GenerateTextTest, LowTemperaturesCollapseToTheSameText) {
  const SyntheticModel model(Spec(128, 1, 6.0, 8));
  GenerationConfig config;
  config.seed = 31;
  config.temperature = 0.001;
  const GeneratedText a = GenerateText(model, config);
  config.temperature = 0.011;
  const GeneratedText b = GenerateText(model, config);
  EXPECT_EQ(a.tokens, b.tokens);
  const TemperatureEstimate e = EstimateTemperature(a.logits, a.Continuation());
  EXPECT_EQ(e.status, EstimateStatus::kSaturatedLowT);
}

TEST(GenerateTextTest, RecoversUnitTemperature) {
  const SyntheticModel model(Spec(128, 1, 3.0, 0));
  GenerationConfig config;
  config.seed = 1;
  config.n_tokens = 1000;
  const GeneratedText text = GenerateText(model, config);
  const TemperatureEstimate e = EstimateTemperature(text.logits, text.Continuation());
  EXPECT_EQ(e.status, EstimateStatus::kConverged);
  EXPECT_GE(e.t_hat, 0.9);
  EXPECT_LE(e.t_hat, 1.1);
}

TEST(GenerateTextTest, LongerTextsEstimateBetter) {
  const SyntheticModel model(Spec(128, 1, 3.0, 2));
  double err_short = 0.0;
  double err_long = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenerationConfig config;
    config.temperature = 0.7;
    config.seed = seed;
    config.n_tokens = 800;
    const GeneratedText text = GenerateText(model, config);
    err_long += std::abs(EstimateTemperature(text.logits, text.Continuation()).t_hat - 0.7);
    config.n_tokens = 50;
    const GeneratedText short_text = GenerateText(model, config);
    err_short += std::abs(
        EstimateTemperature(short_text.logits, short_text.Continuation()).t_hat - 0.7);
  }
  EXPECT_LT(err_long, err_short);
}

TEST(GenerateTextTest, CrossModelScoringEstimatesSomething) {
  const SyntheticModel gen(Spec(64, 1, 3.0, 1));
  const SyntheticModel est(Spec(64, 1, 1.5, 2));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GenerationConfig config;
    config.temperature = 0.2 + 0.02 * static_cast<double>(seed);
    config.seed = seed;
    config.n_tokens = 60;
    const GeneratedText text = GenerateText(gen, config);
    const TemperatureEstimate e =
        EstimateTemperature(ScoreText(est, text.tokens), text.Continuation());
    EXPECT_TRUE(std::isfinite(e.t_hat));
    EXPECT_GT(e.t_hat, 0.0);
  }
}

TEST(GenerateTextTest, Errors) {
  const SyntheticModel model(Spec(16, 1, 3.0, 1));
  GenerationConfig config;
  config.temperature = 0.0;
  EXPECT_THROW(GenerateText(model, config), std::invalid_argument);
  config.temperature = 1.0;
  config.n_tokens = 0;
  EXPECT_THROW(GenerateText(model, config), std::invalid_argument);
  const SyntheticModel other(Spec(32, 1, 3.0, 1));
  EXPECT_THROW(ScoreText(other, TokenSequence(16, {1, 2, 3})), std::invalid_argument);
  EXPECT_THROW(ScoreText(model, TokenSequence(16, {1})), std::invalid_argument);
}

}  // namespace
}  // namespace textemp
