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

// File formats.
//
// TLOG logit dump (all integers unsigned 32-bit little-endian):
//
//   offset  size            field
//   0       4               magic "TLOG"
//   4       4               format_version (1)
//   8       4               n_steps
//   12      4               vocab
//   16      4               dtype_code (1 = IEEE-754 binary32)
//   20      4*n_steps*vocab logits, row-major, little-endian binary32
//   ...     4*n_steps       observed token id of each row
//
// Readers reject anything else, including trailing bytes. Logits are held in
// double precision in memory and rounded to binary32 on write.
//
// Result tables are comma-separated text: optional "# " comment lines, one
// header line naming the schema's columns, then one line per record. Reals
// are printed with 9 significant digits ("%.9g"), NaN as "nan".

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "textemp/estimation.hpp"
#include "textemp/experiments.hpp"
#include "textemp/synthetic_model.hpp"

namespace textemp {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kLogitDumpMagic[4] = {'T', 'L', 'O', 'G'};
inline constexpr std::uint32_t kLogitDumpVersion = 1;
inline constexpr std::uint32_t kDtypeFloat32 = 1;

struct LogitDump {
  LogitSequence logits;
  TokenSequence tokens;
};

void WriteLogitDump(const LogitSequence& logits, const TokenSequence& tokens,
                    std::ostream& out);
void WriteLogitDump(const LogitSequence& logits, const TokenSequence& tokens,
                    const std::filesystem::path& path);

// Throws FormatError on any header, size or content violation.
LogitDump ReadLogitDump(std::istream& in);
LogitDump ReadLogitDump(const std::filesystem::path& path);

enum class TableSchema {
  kEstimate,
  kSweep,
  kCrossGrid,
  kCrossGridPerT,
  kCorpusSummary,
  kSweepPlot,
  kHeatmap,
};

const std::vector<std::string>& SchemaColumns(TableSchema schema);
std::string_view SchemaName(TableSchema schema);
// Throws FormatError when the header matches no known schema.
TableSchema DetectSchema(const std::vector<std::string>& header);

struct ResultTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  explicit ResultTable(TableSchema schema = TableSchema::kEstimate);
  TableSchema schema() const { return DetectSchema(header); }
  std::size_t column(std::string_view name) const;

  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

void WriteResults(const ResultTable& table, std::ostream& out);
void WriteResults(const ResultTable& table, const std::filesystem::path& path);
// Throws FormatError on unknown headers or malformed rows.
ResultTable ReadResults(std::istream& in);
ResultTable ReadResults(const std::filesystem::path& path);

std::string FormatReal(double value);
// Throws FormatError unless the whole field parses as a real.
double ParseReal(std::string_view field);
std::uint64_t ParseUnsigned(std::string_view field);

// Record conversions.
ResultTable EstimatesToTable(const std::vector<std::string>& sources,
                             const std::vector<std::size_t>& n_steps,
                             const std::vector<TemperatureEstimate>& estimates);
ResultTable SweepToTable(const SweepResult& sweep);
SweepResult SweepFromTable(const ResultTable& table);
ResultTable CrossGridToTable(const CrossGridResult& grid);
ResultTable CrossGridPerTemperatureToTable(const CrossGridResult& grid);
ResultTable CorpusStatsToTable(const CorpusStats& stats);

// Tree-structured experiment description (JSON):
//
//   {
//     "seed": 7,                                  optional
//     "grid": {"t_min": 0.001, "t_max": 2.401, "t_step": 0.1},  optional
//     "texts": 10,                                optional
//     "tokens": 200,                              optional
//     "models": [                                 required, non-empty
//       {"name": "narrow", "vocab": 128, "order": 1,
//        "logit_scale": 6.0, "seed": 3}
//     ]
//   }
//
// Model fields other than "seed" fall back to SyntheticModelSpec defaults.
// Unknown keys are rejected.
struct ExperimentSpec {
  std::vector<SyntheticModelSpec> models;
  std::optional<std::uint64_t> seed;
  std::optional<TemperatureGrid> grid;
  std::optional<std::size_t> texts;
  std::optional<std::size_t> tokens;
};

// Throws FormatError on parse or validation errors.
ExperimentSpec ParseExperimentSpec(std::string_view text);
ExperimentSpec ReadExperimentSpec(const std::filesystem::path& path);

}  // namespace textemp
