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

#include <functional>
#include <optional>
#include <string_view>

#include "textemp/estimation.hpp"

namespace textemp {

enum class Stepping {
  kBisection,
  // Brent-style inverse quadratic / secant steps, safeguarded by bisection.
  kAccelerated,
};

struct RootResult {
  double root = 0.0;
  // Final bracket; f changes sign (or vanishes) on [lo, hi].
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
  // False when max_iter ran out before the bracket reached tol_rel.
  bool converged = false;
};

// Locates a sign change of `f` on [lo, hi] to relative bracket width
// `tol_rel`. Throws std::invalid_argument if f(lo) and f(hi) are not finite
// with opposite signs. If `probe` lies strictly inside the bracket it is
// evaluated first.
RootResult FindRoot(const std::function<double(double)>& f, double lo,
                    double hi, double tol_rel, int max_iter,
                    Stepping stepping = Stepping::kAccelerated,
                    std::optional<double> probe = std::nullopt);

// Same, with the endpoint values already known.
RootResult FindRootInBracket(const std::function<double(double)>& f, double lo,
                             double f_lo, double hi, double f_hi,
                             double tol_rel, int max_iter, Stepping stepping,
                             std::optional<double> probe);

struct SolverConfig {
  double beta_lo = 1e-2;
  double beta_hi = 1e4;
  double beta_init = 5e3;
  double tol_beta_rel = 1e-10;
  int max_iter = 200;
  Stepping stepping = Stepping::kAccelerated;

  // Throws std::invalid_argument unless 0 < beta_lo < beta_init < beta_hi,
  // tol_beta_rel > 0 and max_iter > 0.
  void Validate() const;
};

enum class EstimateStatus {
  kConverged,
  // Residual negative across the bracket: clamped at beta_hi.
  kSaturatedLowT,
  // Residual positive across the bracket: clamped at beta_lo.
  kSaturatedHighT,
  // Every step has all-equal logits; any T maximizes the likelihood.
  kDegenerate,
};

std::string_view StatusName(EstimateStatus status);
// Inverse of StatusName; throws std::invalid_argument on unknown names.
EstimateStatus ParseStatus(std::string_view name);

struct TemperatureEstimate {
  double t_hat = 1.0;
  double beta_hat = 1.0;
  EstimateStatus status = EstimateStatus::kDegenerate;
  int iterations = 0;
  double residual_at_root = 0.0;
  double log_likelihood_at_root = 0.0;
  // Relative width of the final beta bracket (0 for clamped results).
  double bracket_width_rel = 0.0;
  bool tolerance_met = true;
};

// Maximum-likelihood temperature of `tokens` under `logits`.
//
// The residual is evaluated at both bracket ends first. A sign change leads to
// a root search in beta; otherwise the estimate is clamped to the relevant end
// and flagged as saturated. An all-degenerate input reports t_hat = 1.
TemperatureEstimate EstimateTemperature(const LogitSequence& logits,
                                        const TokenSequence& tokens,
                                        const SolverConfig& config = {});

}  // namespace textemp
