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

#include "textemp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "textemp/metrics.hpp"

namespace textemp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Slack for grids whose span is an exact multiple of the step in decimal but
// not in binary, e.g. (2.401 - 0.001) / 0.1.
constexpr double kGridSlack = 1e-9;

template <typename Fn>
double OrNaN(Fn&& fn) {
  try {
    return fn();
  } catch (const std::domain_error&) {
    return kNaN;
  } catch (const std::invalid_argument&) {
    return kNaN;
  }
}

}  // namespace

void TemperatureGrid::Validate() const {
  if (!(t_min > 0.0) || !std::isfinite(t_max)) {
    throw std::invalid_argument("grid temperatures must be positive and finite");
  }
  if (!(t_min <= t_max)) throw std::invalid_argument("grid needs t_min <= t_max");
  if (!(t_step > 0.0) || !std::isfinite(t_step)) {
    throw std::invalid_argument("grid step must be positive");
  }
}

std::vector<double> TemperatureGrid::Values() const {
  Validate();
  const auto count =
      static_cast<std::size_t>(std::floor((t_max - t_min) / t_step + kGridSlack)) + 1;
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = t_min + static_cast<double>(i) * t_step;
  }
  return values;
}

void SweepOptions::Validate() const {
  grid.Validate();
  solver.Validate();
  if (texts_per_t < 1) throw std::invalid_argument("need at least one text per temperature");
  if (n_tokens < 1) throw std::invalid_argument("need at least one token per text");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

std::uint64_t TextSeed(std::uint64_t experiment_seed, std::size_t text_index) {
  return Combine(Mix64(experiment_seed), text_index);
}

void ParallelFor(std::size_t n, unsigned jobs,
                 const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

SweepResult RunSweep(const SyntheticModel& generator,
                     const SyntheticModel& estimator,
                     const SweepOptions& options) {
  options.Validate();
  if (generator.vocab() != estimator.vocab()) {
    throw std::invalid_argument(
        "vocabulary mismatch: generator " + generator.id() + " has " +
        std::to_string(generator.vocab()) + " tokens, estimator " +
        estimator.id() + " has " + std::to_string(estimator.vocab()));
  }
  const bool self_estimation = &generator == &estimator;
  const std::vector<double> temps = options.grid.Values();
  const std::size_t n_texts = options.texts_per_t;

  SweepResult result;
  result.rows.resize(temps.size() * n_texts);
  ParallelFor(result.rows.size(), options.jobs, [&](std::size_t cell) {
    const std::size_t t_index = cell / n_texts;
    const std::size_t text_index = cell % n_texts;
    GenerationConfig config;
    config.temperature = temps[t_index];
    config.n_tokens = options.n_tokens;
    config.seed = TextSeed(options.seed, text_index);
    const GeneratedText text = GenerateText(generator, config);

    SweepRow& row = result.rows[cell];
    row.gen_model_id = generator.id();
    row.est_model_id = estimator.id();
    row.gen_temperature = temps[t_index];
    row.text_index = text_index;
    if (self_estimation) {
      row.estimate = EstimateTemperature(text.logits, text.Continuation(), options.solver);
    } else {
      row.estimate = EstimateTemperature(ScoreText(estimator, text.tokens),
                                         text.Continuation(), options.solver);
    }
  });
  return result;
}

SweepSummary Summarize(std::span<const SweepRow> rows) {
  SweepSummary s;
  s.n_rows = rows.size();
  std::vector<double> est_all;
  std::vector<double> gen_all;
  std::vector<double> est_ok;
  std::vector<double> gen_ok;
  for (const SweepRow& row : rows) {
    est_all.push_back(row.estimate.t_hat);
    gen_all.push_back(row.gen_temperature);
    if (row.estimate.status == EstimateStatus::kConverged) {
      est_ok.push_back(row.estimate.t_hat);
      gen_ok.push_back(row.gen_temperature);
    } else {
      ++s.n_saturated;
    }
  }
  s.mae_all = OrNaN([&] { return Mae(est_all, gen_all); });
  s.mae_converged = OrNaN([&] { return Mae(est_ok, gen_ok); });
  s.r2 = OrNaN([&] { return R2(est_ok, gen_ok); });
  s.pearson = OrNaN([&] { return Pearson(est_ok, gen_ok); });
  return s;
}

std::vector<PerTemperatureMetrics> PerTemperature(const SweepResult& sweep) {
  std::vector<PerTemperatureMetrics> out;
  std::size_t begin = 0;
  const auto& rows = sweep.rows;
  while (begin < rows.size()) {
    std::size_t end = begin;
    while (end < rows.size() && rows[end].gen_temperature == rows[begin].gen_temperature &&
           rows[end].gen_model_id == rows[begin].gen_model_id &&
           rows[end].est_model_id == rows[begin].est_model_id) {
      ++end;
    }
    const std::span<const SweepRow> group(rows.data() + begin, end - begin);
    const SweepSummary s = Summarize(group);
    PerTemperatureMetrics m;
    m.generator = rows[begin].gen_model_id;
    m.estimator = rows[begin].est_model_id;
    m.gen_temperature = rows[begin].gen_temperature;
    m.n_rows = s.n_rows;
    m.n_saturated = s.n_saturated;
    m.mae_all = s.mae_all;
    m.mae_converged = s.mae_converged;
    double total = 0.0;
    for (const SweepRow& r : group) total += r.estimate.t_hat;
    m.mean_t_hat = total / static_cast<double>(group.size());
    out.push_back(std::move(m));
    begin = end;
  }
  return out;
}

CrossGridResult CrossGrid(std::span<const SyntheticModel> models,
                          const SweepOptions& options) {
  if (models.size() < 2) {
    throw std::invalid_argument("a cross grid needs at least two models");
  }
  for (const SyntheticModel& m : models) {
    if (m.vocab() != models.front().vocab()) {
      throw std::invalid_argument("vocabulary mismatch between " +
                                  models.front().id() + " and " + m.id());
    }
  }
  CrossGridResult grid;
  for (const SyntheticModel& m : models) grid.model_ids.push_back(m.id());
  for (const SyntheticModel& generator : models) {
    for (const SyntheticModel& estimator : models) {
      const SweepResult sweep = RunSweep(generator, estimator, options);
      grid.cells.push_back({generator.id(), estimator.id(), Summarize(sweep.rows)});
      for (PerTemperatureMetrics& m : PerTemperature(sweep)) {
        grid.per_temperature.push_back(std::move(m));
      }
    }
  }
  return grid;
}

bool DiagonalDominates(const CrossGridResult& grid) {
  const std::size_t n = grid.model_ids.size();
  for (std::size_t g = 0; g < n; ++g) {
    const double diagonal = grid.at(g, g).summary.mae_all;
    for (std::size_t e = 0; e < n; ++e) {
      if (!(diagonal <= grid.at(g, e).summary.mae_all)) return false;
    }
  }
  return true;
}

CorpusStats ComputeCorpusStats(std::span<const TemperatureEstimate> estimates,
                               std::string corpus_id) {
  if (estimates.empty()) throw std::invalid_argument("corpus has no estimates");
  CorpusStats stats;
  stats.corpus_id = std::move(corpus_id);
  stats.n_texts = estimates.size();
  std::vector<double> ok;
  for (const TemperatureEstimate& e : estimates) {
    if (e.status == EstimateStatus::kConverged) {
      ok.push_back(e.t_hat);
    } else {
      ++stats.n_saturated;
    }
  }
  if (ok.empty()) {
    throw std::domain_error("corpus '" + stats.corpus_id +
                            "' has no converged estimates");
  }
  double sum = 0.0;
  for (double t : ok) sum += t;
  stats.mean_t = sum / static_cast<double>(ok.size());
  double ss = 0.0;
  for (double t : ok) ss += (t - stats.mean_t) * (t - stats.mean_t);
  stats.std_t = std::sqrt(ss / static_cast<double>(ok.size()));
  return stats;
}

}  // namespace textemp
