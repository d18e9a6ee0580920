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

#include "textemp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace textemp {
namespace {

bool SameSign(double a, double b) { return (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0); }

double RelativeWidth(double lo, double hi) {
  const double scale = std::max(std::abs(lo), std::abs(hi));
  return scale == 0.0 ? 0.0 : std::abs(hi - lo) / scale;
}

RootResult Bisect(const std::function<double(double)>& f, double lo,
                  double f_lo, double hi, double tol_rel, int max_iter,
                  int iterations) {
  while (iterations < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(hi - lo) <= tol_rel * std::abs(mid)) {
      return {mid, lo, hi, iterations, true};
    }
    const double f_mid = f(mid);
    ++iterations;
    if (f_mid == 0.0) return {mid, mid, mid, iterations, true};
    if (SameSign(f_mid, f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double mid = 0.5 * (lo + hi);
  return {mid, lo, hi, iterations, std::abs(hi - lo) <= tol_rel * std::abs(mid)};
}

// Brent's zeroin with a relative tolerance. `b` is the best estimate and
// [b, c] always brackets the sign change.
RootResult Brent(const std::function<double(double)>& f, double a, double fa,
                 double b, double fb, double tol_rel, int max_iter,
                 int iterations) {
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (;;) {
    if (SameSign(fb, fc)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 0.5 * tol_rel * std::abs(b);
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      return {b, std::min(b, c), std::max(b, c), iterations, true};
    }
    if (iterations >= max_iter) {
      return {b, std::min(b, c), std::max(b, c), iterations, false};
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
    fb = f(b);
    ++iterations;
  }
}

}  // namespace

RootResult FindRootInBracket(const std::function<double(double)>& f, double lo,
                             double f_lo, double hi, double f_hi,
                             double tol_rel, int max_iter, Stepping stepping,
                             std::optional<double> probe) {
  if (!(lo < hi)) throw std::invalid_argument("root bracket must satisfy lo < hi");
  if (!(tol_rel > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter <= 0) throw std::invalid_argument("max_iter must be positive");
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi)) {
    throw std::invalid_argument("function is not finite at the bracket ends");
  }
  if (f_lo == 0.0) return {lo, lo, lo, 0, true};
  if (f_hi == 0.0) return {hi, hi, hi, 0, true};
  if (SameSign(f_lo, f_hi)) {
    throw std::invalid_argument("no sign change on [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "]");
  }

  int iterations = 0;
  if (probe && *probe > lo && *probe < hi) {
    const double f_probe = f(*probe);
    ++iterations;
    if (f_probe == 0.0) return {*probe, *probe, *probe, iterations, true};
    if (SameSign(f_probe, f_lo)) {
      lo = *probe;
      f_lo = f_probe;
    } else {
      hi = *probe;
      f_hi = f_probe;
    }
  }

  if (stepping == Stepping::kBisection) {
    return Bisect(f, lo, f_lo, hi, tol_rel, max_iter, iterations);
  }
  return Brent(f, lo, f_lo, hi, f_hi, tol_rel, max_iter, iterations);
}

RootResult FindRoot(const std::function<double(double)>& f, double lo,
                    double hi, double tol_rel, int max_iter, Stepping stepping,
                    std::optional<double> probe) {
  return FindRootInBracket(f, lo, f(lo), hi, f(hi), tol_rel, max_iter,
                           stepping, probe);
}

void SolverConfig::Validate() const {
  if (!(beta_lo > 0.0 && beta_lo < beta_init && beta_init < beta_hi) ||
      !std::isfinite(beta_hi)) {
    throw std::invalid_argument(
        "solver bracket must satisfy 0 < beta_lo < beta_init < beta_hi");
  }
  if (!(tol_beta_rel > 0.0)) {
    throw std::invalid_argument("solver tolerance must be positive");
  }
  if (max_iter <= 0) throw std::invalid_argument("max_iter must be positive");
}

std::string_view StatusName(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::kConverged:
      return "converged";
    case EstimateStatus::kSaturatedLowT:
      return "saturated_low_T";
    case EstimateStatus::kSaturatedHighT:
      return "saturated_high_T";
    case EstimateStatus::kDegenerate:
      return "degenerate";
  }
  return "unknown";
}

EstimateStatus ParseStatus(std::string_view name) {
  for (EstimateStatus s :
       {EstimateStatus::kConverged, EstimateStatus::kSaturatedLowT,
        EstimateStatus::kSaturatedHighT, EstimateStatus::kDegenerate}) {
    if (StatusName(s) == name) return s;
  }
  throw std::invalid_argument("unknown estimate status '" + std::string(name) + "'");
}

TemperatureEstimate EstimateTemperature(const LogitSequence& logits,
                                        const TokenSequence& tokens,
                                        const SolverConfig& config) {
  CheckAligned(logits, tokens);
  config.Validate();

  TemperatureEstimate est;
  bool all_degenerate = true;
  for (std::size_t i = 0; i < logits.size() && all_degenerate; ++i) {
    all_degenerate = IsDegenerate(logits.row(i));
  }
  if (all_degenerate) {
    est.status = EstimateStatus::kDegenerate;
    est.beta_hat = 1.0;
    est.t_hat = 1.0;
    est.log_likelihood_at_root = LogLikelihood(logits, tokens, Temperature(1.0));
    return est;
  }

  auto residual = [&](double beta) { return Residual(logits, tokens, beta); };
  const double r_lo = residual(config.beta_lo);
  const double r_hi = residual(config.beta_hi);

  if (r_hi <= 0.0) {
    // Observed logits reach or exceed the expectation even at the coldest end.
    est.status = EstimateStatus::kSaturatedLowT;
    est.beta_hat = config.beta_hi;
    est.residual_at_root = r_hi;
  } else if (r_lo >= 0.0) {
    est.status = EstimateStatus::kSaturatedHighT;
    est.beta_hat = config.beta_lo;
    est.residual_at_root = r_lo;
  } else {
    const RootResult root = FindRootInBracket(
        residual, config.beta_lo, r_lo, config.beta_hi, r_hi,
        config.tol_beta_rel, config.max_iter, config.stepping, config.beta_init);
    est.status = EstimateStatus::kConverged;
    est.beta_hat = root.root;
    est.iterations = root.iterations;
    est.residual_at_root = residual(root.root);
    est.bracket_width_rel = RelativeWidth(root.lo, root.hi);
    est.tolerance_met = root.converged;
  }
  est.t_hat = 1.0 / est.beta_hat;
  est.log_likelihood_at_root =
      LogLikelihood(logits, tokens, Temperature(est.t_hat));
  return est;
}

}  // namespace textemp
