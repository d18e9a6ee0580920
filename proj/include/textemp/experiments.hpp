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

// Experiment drivers: temperature sweeps, generator x estimator grids, and
// corpus aggregation.
//
// Every (temperature, text) cell draws from its own stream keyed by
// TextSeed(seed, text_index), so results do not depend on execution order or
// on the number of worker threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "textemp/solver.hpp"
#include "textemp/synthetic_model.hpp"

namespace textemp {

struct TemperatureGrid {
  double t_min = 0.001;
  double t_max = 2.401;
  double t_step = 0.1;

  void Validate() const;
  // t_min + i * t_step for i = 0 .. floor((t_max - t_min) / t_step).
  std::vector<double> Values() const;
};

struct SweepOptions {
  TemperatureGrid grid;
  std::size_t texts_per_t = 10;
  std::size_t n_tokens = 200;
  std::uint64_t seed = 0;
  SolverConfig solver;
  unsigned jobs = 1;

  void Validate() const;
};

// Generation stream for text `text_index`. The temperature does not enter, so
// texts with the same index share their draws across the grid.
std::uint64_t TextSeed(std::uint64_t experiment_seed, std::size_t text_index);

struct SweepRow {
  std::string gen_model_id;
  std::string est_model_id;
  double gen_temperature = 0.0;
  std::size_t text_index = 0;
  TemperatureEstimate estimate;
};

// Rows are ordered by grid temperature, then text index.
struct SweepResult {
  std::vector<SweepRow> rows;
};

// Generates texts_per_t texts per grid temperature with `generator` and
// estimates each with `estimator`. Throws std::invalid_argument when the two
// vocabularies differ.
SweepResult RunSweep(const SyntheticModel& generator,
                     const SyntheticModel& estimator,
                     const SweepOptions& options);

struct SweepSummary {
  std::size_t n_rows = 0;
  std::size_t n_saturated = 0;
  // Over all rows, clamped estimates included.
  double mae_all = 0.0;
  // Over converged rows only; NaN when there are none.
  double mae_converged = 0.0;
  // Over converged rows; NaN when undefined (fewer than two distinct values).
  double r2 = 0.0;
  double pearson = 0.0;
};

SweepSummary Summarize(std::span<const SweepRow> rows);

struct PairMetrics {
  std::string generator;
  std::string estimator;
  SweepSummary summary;
};

struct PerTemperatureMetrics {
  std::string generator;
  std::string estimator;
  double gen_temperature = 0.0;
  std::size_t n_rows = 0;
  std::size_t n_saturated = 0;
  double mae_all = 0.0;
  double mae_converged = 0.0;
  double mean_t_hat = 0.0;
};

std::vector<PerTemperatureMetrics> PerTemperature(const SweepResult& sweep);

struct CrossGridResult {
  std::vector<std::string> model_ids;
  // Row-major: cells[g * n + e] is generator g estimated by estimator e.
  std::vector<PairMetrics> cells;
  std::vector<PerTemperatureMetrics> per_temperature;

  const PairMetrics& at(std::size_t generator, std::size_t estimator) const {
    return cells[generator * model_ids.size() + estimator];
  }
};

// Runs RunSweep for every ordered (generator, estimator) pair and pools the
// metrics over all (temperature, text) rows.
CrossGridResult CrossGrid(std::span<const SyntheticModel> models,
                          const SweepOptions& options);

// True when every row of the pooled MAE matrix attains its minimum on the
// diagonal.
bool DiagonalDominates(const CrossGridResult& grid);

struct CorpusStats {
  std::string corpus_id;
  // All texts, flagged ones included.
  std::size_t n_texts = 0;
  // Mean and population standard deviation over converged estimates.
  double mean_t = 0.0;
  double std_t = 0.0;
  // Saturated or degenerate estimates, excluded from mean_t and std_t.
  std::size_t n_saturated = 0;
};

// Throws std::invalid_argument on empty input and std::domain_error when no
// estimate converged.
CorpusStats ComputeCorpusStats(std::span<const TemperatureEstimate> estimates,
                               std::string corpus_id);

// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown by any call is rethrown after all workers finish.
void ParallelFor(std::size_t n, unsigned jobs,
                 const std::function<void(std::size_t)>& fn);

}  // namespace textemp
