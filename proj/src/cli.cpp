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

#include "textemp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "textemp/experiments.hpp"
#include "textemp/metrics.hpp"
#include "textemp/solver.hpp"
#include "textemp/storage.hpp"
#include "textemp/synthetic_model.hpp"

namespace textemp {
namespace {

namespace fs = std::filesystem;

struct SolverFlags {
  double beta_lo = SolverConfig{}.beta_lo;
  double beta_hi = SolverConfig{}.beta_hi;
  double beta_init = SolverConfig{}.beta_init;
  double tol = SolverConfig{}.tol_beta_rel;
  int max_iter = SolverConfig{}.max_iter;
  CLI::Option* beta_init_opt = nullptr;

  void Register(CLI::App* cmd) {
    cmd->add_option("--bracket-lo", beta_lo, "Lower end of the inverse-temperature bracket")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--bracket-hi", beta_hi, "Upper end of the inverse-temperature bracket")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    beta_init_opt =
        cmd->add_option("--beta-init", beta_init,
                        "First inverse temperature probed inside the bracket "
                        "(geometric midpoint if the default falls outside)")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    cmd->add_option("--tol", tol, "Relative width of the final inverse-temperature bracket")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Root-finder iteration limit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  SolverConfig Config() const {
    SolverConfig c;
    c.beta_lo = beta_lo;
    c.beta_hi = beta_hi;
    c.beta_init = beta_init;
    c.tol_beta_rel = tol;
    c.max_iter = max_iter;
    if (beta_init_opt->count() == 0 && !(beta_lo < beta_init && beta_init < beta_hi)) {
      c.beta_init = std::sqrt(beta_lo * beta_hi);
    }
    c.Validate();
    return c;
  }
};

struct GridFlags {
  TemperatureGrid grid;
  std::size_t texts = 10;
  std::size_t tokens = 200;
  CLI::Option* tmin = nullptr;
  CLI::Option* tmax = nullptr;
  CLI::Option* tstep = nullptr;
  CLI::Option* texts_opt = nullptr;
  CLI::Option* tokens_opt = nullptr;

  void Register(CLI::App* cmd) {
    tmin = cmd->add_option("--tmin", grid.t_min, "Lowest generation temperature")
               ->check(CLI::PositiveNumber)
               ->capture_default_str();
    tmax = cmd->add_option("--tmax", grid.t_max, "Highest generation temperature")
               ->check(CLI::PositiveNumber)
               ->capture_default_str();
    tstep = cmd->add_option("--tstep", grid.t_step, "Grid step")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
    texts_opt = cmd->add_option("--texts", texts, "Texts per temperature")
                    ->check(CLI::PositiveNumber)
                    ->capture_default_str();
    tokens_opt = cmd->add_option("--tokens", tokens, "Continuation tokens per text")
                     ->check(CLI::PositiveNumber)
                     ->capture_default_str();
  }
};

void WriteTableTo(const ResultTable& table, const std::string& path, std::ostream& out) {
  if (path == "-") {
    WriteResults(table, out);
  } else {
    WriteResults(table, fs::path(path));
  }
}

std::string Describe(const SweepSummary& s) {
  std::ostringstream os;
  os << "rows " << s.n_rows << "  saturated " << s.n_saturated << "  mae_all "
     << FormatReal(s.mae_all) << "  mae_converged " << FormatReal(s.mae_converged)
     << "  r2 " << FormatReal(s.r2) << "  pearson " << FormatReal(s.pearson);
  return os.str();
}

// --- estimate ---------------------------------------------------------------

struct EstimateCmd {
  std::string logits_path;
  std::string format = "text";
  SolverFlags solver;

  void Register(CLI::App* cmd) {
    cmd->add_option("--logits", logits_path, "TLOG logit dump to estimate")->required();
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "records"}))
        ->capture_default_str();
    solver.Register(cmd);
  }

  int Run(std::ostream& out, std::ostream& err) const {
    const LogitDump dump = ReadLogitDump(fs::path(logits_path));
    const TemperatureEstimate e =
        EstimateTemperature(dump.logits, dump.tokens, solver.Config());
    if (e.status == EstimateStatus::kDegenerate) {
      err << "warning: every step of " << logits_path
          << " has all-equal logits; the temperature is not identifiable\n";
    } else if (e.status != EstimateStatus::kConverged) {
      err << "warning: " << logits_path << " saturates the bracket (" << StatusName(e.status)
          << ")\n";
    }
    if (!e.tolerance_met) {
      err << "warning: root finder stopped before reaching the tolerance\n";
    }
    if (format == "records") {
      WriteResults(EstimatesToTable({fs::path(logits_path).filename().string()},
                                    {dump.logits.size()}, {e}),
                   out);
    } else {
      out << "t_hat           " << FormatReal(e.t_hat) << "\n"
          << "beta_hat        " << FormatReal(e.beta_hat) << "\n"
          << "status          " << StatusName(e.status) << "\n"
          << "log_likelihood  " << FormatReal(e.log_likelihood_at_root) << "\n"
          << "steps           " << dump.logits.size() << "\n"
          << "iterations      " << e.iterations << "\n";
    }
    return kExitOk;
  }
};

// --- sweep ------------------------------------------------------------------

struct SweepCmd {
  std::uint64_t gen_seed = 0;
  std::uint64_t est_seed = 0;
  std::uint64_t seed = 0;
  std::size_t vocab = SyntheticModelSpec{}.vocab;
  std::size_t order = SyntheticModelSpec{}.order;
  double logit_scale = SyntheticModelSpec{}.logit_scale;
  double est_logit_scale = 0.0;
  std::string out_path;
  unsigned jobs = 1;
  GridFlags grid;
  CLI::Option* est_seed_opt = nullptr;
  CLI::Option* est_scale_opt = nullptr;

  void Register(CLI::App* cmd) {
    cmd->add_option("--gen-seed", gen_seed, "Seed of the generating model")->required();
    est_seed_opt = cmd->add_option("--est-seed", est_seed,
                                   "Seed of the estimating model (default: --gen-seed)");
    cmd->add_option("--seed", seed, "Experiment seed for the text streams")->required();
    cmd->add_option("--vocab", vocab, "Vocabulary size")
        ->check(CLI::Range(std::size_t{2}, std::size_t{0xFFFFFFFE}))
        ->capture_default_str();
    cmd->add_option("--order", order, "Context length of the models")->capture_default_str();
    cmd->add_option("--logit-scale", logit_scale, "Standard deviation of the logit table")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    est_scale_opt = cmd->add_option("--est-logit-scale", est_logit_scale,
                                    "Logit scale of the estimating model (default: "
                                    "--logit-scale)")
                        ->check(CLI::PositiveNumber);
    grid.Register(cmd);
    cmd->add_option("--out", out_path, "Sweep table to write ('-' for stdout)")->required();
    cmd->add_option("--jobs", jobs, "Worker threads; output is identical for any value")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  int Run(std::ostream& out, std::ostream& err) const {
    SyntheticModelSpec gen_spec;
    gen_spec.vocab = vocab;
    gen_spec.order = order;
    gen_spec.logit_scale = logit_scale;
    gen_spec.seed = gen_seed;
    SyntheticModelSpec est_spec = gen_spec;
    if (est_seed_opt->count()) est_spec.seed = est_seed;
    if (est_scale_opt->count()) est_spec.logit_scale = est_logit_scale;

    SweepOptions options;
    options.grid = grid.grid;
    options.texts_per_t = grid.texts;
    options.n_tokens = grid.tokens;
    options.seed = seed;
    options.jobs = jobs;

    const SyntheticModel generator = BuildModel(gen_spec);
    SweepResult sweep;
    if (est_spec.seed == gen_spec.seed && est_spec.logit_scale == gen_spec.logit_scale) {
      sweep = RunSweep(generator, generator, options);
    } else {
      const SyntheticModel estimator = BuildModel(est_spec);
      sweep = RunSweep(generator, estimator, options);
    }
    WriteTableTo(SweepToTable(sweep), out_path, out);
    (out_path == "-" ? err : out) << "sweep " << Describe(Summarize(sweep.rows)) << "\n";
    return kExitOk;
  }
};

// --- crossgrid --------------------------------------------------------------

struct CrossGridCmd {
  std::string models_path;
  std::string out_path;
  std::string per_t_path;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool assert_diagonal = false;
  GridFlags grid;
  CLI::Option* seed_opt = nullptr;

  void Register(CLI::App* cmd) {
    cmd->add_option("--models", models_path, "JSON experiment spec listing the models")
        ->required();
    cmd->add_option("--out", out_path, "Metric matrix table to write ('-' for stdout)")
        ->required();
    cmd->add_option("--per-t-out", per_t_path,
                    "Optional per-temperature breakdown table to write");
    seed_opt = cmd->add_option("--seed", seed,
                               "Experiment seed (required unless the spec sets one)");
    grid.Register(cmd);
    cmd->add_option("--jobs", jobs, "Worker threads; output is identical for any value")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_flag("--assert-diagonal", assert_diagonal,
                  "Exit with status 3 unless every row's MAE is smallest on the diagonal");
  }

  int Run(std::ostream& out, std::ostream& err) const {
    const ExperimentSpec spec = ReadExperimentSpec(fs::path(models_path));
    SweepOptions options;
    options.jobs = jobs;
    options.grid = spec.grid.value_or(TemperatureGrid{});
    if (grid.tmin->count()) options.grid.t_min = grid.grid.t_min;
    if (grid.tmax->count()) options.grid.t_max = grid.grid.t_max;
    if (grid.tstep->count()) options.grid.t_step = grid.grid.t_step;
    options.texts_per_t = grid.texts_opt->count() ? grid.texts : spec.texts.value_or(grid.texts);
    options.n_tokens = grid.tokens_opt->count() ? grid.tokens : spec.tokens.value_or(grid.tokens);
    if (seed_opt->count()) {
      options.seed = seed;
    } else if (spec.seed) {
      options.seed = *spec.seed;
    } else {
      throw std::invalid_argument("crossgrid needs an experiment seed (--seed or \"seed\")");
    }

    std::vector<SyntheticModel> models;
    for (const SyntheticModelSpec& s : spec.models) models.push_back(BuildModel(s));
    const CrossGridResult result = CrossGrid(models, options);
    WriteTableTo(CrossGridToTable(result), out_path, out);
    if (!per_t_path.empty()) {
      WriteTableTo(CrossGridPerTemperatureToTable(result), per_t_path, out);
    }
    std::ostream& note = out_path == "-" ? err : out;
    note << "crossgrid " << result.model_ids.size() << "x" << result.model_ids.size()
         << " cells written\n";
    if (assert_diagonal && !DiagonalDominates(result)) {
      err << "error: MAE matrix is not diagonally dominant\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  }
};

// --- corpus -----------------------------------------------------------------

struct CorpusCmd {
  std::string dir;
  std::string out_path;
  std::string summary_path;
  std::string corpus_id;
  bool strict = false;
  unsigned jobs = 1;
  SolverFlags solver;

  void Register(CLI::App* cmd) {
    cmd->add_option("--dir", dir, "Directory of .tlog dumps")->required();
    cmd->add_option("--out", out_path, "Per-text estimate table to write ('-' for stdout)")
        ->required();
    cmd->add_option("--summary-out", summary_path, "Optional corpus summary table to write");
    cmd->add_option("--corpus-id", corpus_id, "Corpus identifier (default: directory name)");
    cmd->add_flag("--strict", strict, "Fail on unreadable dumps instead of skipping them");
    cmd->add_option("--jobs", jobs, "Worker threads; output is identical for any value")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solver.Register(cmd);
  }

  int Run(std::ostream& out, std::ostream& err) const {
    const fs::path root(dir);
    if (!fs::is_directory(root)) {
      throw std::runtime_error("not a directory: " + dir);
    }
    std::vector<fs::path> files;
    for (const fs::directory_entry& entry : fs::directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().extension() == ".tlog") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .tlog files in " + dir);

    const SolverConfig config = solver.Config();
    std::vector<TemperatureEstimate> estimates(files.size());
    std::vector<std::size_t> steps(files.size());
    std::vector<std::string> failures(files.size());
    ParallelFor(files.size(), jobs, [&](std::size_t i) {
      try {
        const LogitDump dump = ReadLogitDump(files[i]);
        steps[i] = dump.logits.size();
        estimates[i] = EstimateTemperature(dump.logits, dump.tokens, config);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    });

    std::vector<std::string> kept_sources;
    std::vector<std::size_t> kept_steps;
    std::vector<TemperatureEstimate> kept;
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (!failures[i].empty()) {
        if (strict) throw std::runtime_error(failures[i]);
        err << "warning: skipping " << failures[i] << "\n";
        continue;
      }
      kept_sources.push_back(files[i].filename().string());
      kept_steps.push_back(steps[i]);
      kept.push_back(estimates[i]);
    }
    if (kept.empty()) throw std::runtime_error("no readable dumps in " + dir);

    std::string id = corpus_id;
    if (id.empty()) {
      id = fs::absolute(root).lexically_normal().filename().string();
      if (id.empty()) id = fs::absolute(root).lexically_normal().parent_path().filename().string();
    }
    const CorpusStats stats = ComputeCorpusStats(kept, id);
    WriteTableTo(EstimatesToTable(kept_sources, kept_steps, kept), out_path, out);
    const ResultTable summary = CorpusStatsToTable(stats);
    if (!summary_path.empty()) WriteTableTo(summary, summary_path, out);
    if (out_path != "-") WriteResults(summary, out);
    return kExitOk;
  }
};

// --- report -----------------------------------------------------------------

struct ReportCmd {
  std::string in_path;
  std::string emit;
  std::string out_path = "-";
  std::string metric = "mae_all";

  void Register(CLI::App* cmd) {
    cmd->add_option("--in", in_path, "Sweep or crossgrid table")->required();
    cmd->add_option("--emit", emit, "Plot data to emit")
        ->required()
        ->check(CLI::IsMember({"sweep-plot", "heatmap"}));
    cmd->add_option("--out", out_path, "Destination ('-' for stdout)")->capture_default_str();
    cmd->add_option("--metric", metric, "Heatmap value column")
        ->check(CLI::IsMember({"mae_all", "mae_converged", "r2", "pearson"}))
        ->capture_default_str();
  }

  int Run(std::ostream& out, std::ostream&) const {
    const ResultTable in = ReadResults(fs::path(in_path));
    const TableSchema schema = in.schema();
    ResultTable plot(emit == "heatmap" ? TableSchema::kHeatmap : TableSchema::kSweepPlot);
    if (emit == "sweep-plot") {
      if (schema != TableSchema::kSweep) {
        throw std::invalid_argument("sweep-plot needs a sweep table, got " +
                                    std::string(SchemaName(schema)));
      }
      const SweepResult sweep = SweepFromTable(in);
      plot.comments.push_back(
          "series 'estimate': one point per text (x = generation T, y = estimated T, "
          "saturated rows at clamped values); series 'mean': per-temperature mean");
      std::vector<double> order;
      std::map<double, std::pair<double, std::size_t>> sums;
      for (const SweepRow& r : sweep.rows) {
        plot.rows.push_back(
            {"estimate", FormatReal(r.gen_temperature), FormatReal(r.estimate.t_hat)});
        auto [it, inserted] = sums.try_emplace(r.gen_temperature, 0.0, 0);
        if (inserted) order.push_back(r.gen_temperature);
        it->second.first += r.estimate.t_hat;
        ++it->second.second;
      }
      for (double t : order) {
        const auto& [sum, n] = sums.at(t);
        plot.rows.push_back({"mean", FormatReal(t), FormatReal(sum / static_cast<double>(n))});
      }
    } else {
      if (schema != TableSchema::kCrossGrid) {
        throw std::invalid_argument("heatmap needs a crossgrid table, got " +
                                    std::string(SchemaName(schema)));
      }
      const std::size_t col = in.column(metric);
      for (const auto& row : in.rows) plot.rows.push_back({row[0], row[1], row[col]});
    }
    WriteTableTo(plot, out_path, out);
    return kExitOk;
  }
};

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum-likelihood temperature estimation for token sequences"};
  app.name("textemp");
  app.require_subcommand(1);

  EstimateCmd estimate;
  SweepCmd sweep;
  CrossGridCmd crossgrid;
  CorpusCmd corpus;
  ReportCmd report;
  CLI::App* estimate_app =
      app.add_subcommand("estimate", "Estimate the temperature of one TLOG logit dump");
  CLI::App* sweep_app = app.add_subcommand(
      "sweep", "Generate texts over a temperature grid with a synthetic model and estimate each");
  CLI::App* crossgrid_app = app.add_subcommand(
      "crossgrid", "Estimate every model's texts with every other model and tabulate metrics");
  CLI::App* corpus_app =
      app.add_subcommand("corpus", "Estimate every dump in a directory and aggregate");
  CLI::App* report_app =
      app.add_subcommand("report", "Turn sweep or crossgrid tables into plot-ready columns");
  estimate.Register(estimate_app);
  sweep.Register(sweep_app);
  crossgrid.Register(crossgrid_app);
  corpus.Register(corpus_app);
  report.Register(report_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (estimate_app->parsed()) return estimate.Run(out, err);
    if (sweep_app->parsed()) return sweep.Run(out, err);
    if (crossgrid_app->parsed()) return crossgrid.Run(out, err);
    if (corpus_app->parsed()) return corpus.Run(out, err);
    if (report_app->parsed()) return report.Run(out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("textemp");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace textemp
