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

#include "textemp/storage.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace textemp {
namespace {

constexpr std::size_t kHeaderBytes = 20;
// Rows are decoded in chunks so a corrupt header cannot force a huge
// allocation before the payload is known to exist.
constexpr std::size_t kChunkValues = 1 << 16;

void PutU32(std::uint32_t v, unsigned char* out) {
  out[0] = static_cast<unsigned char>(v);
  out[1] = static_cast<unsigned char>(v >> 8);
  out[2] = static_cast<unsigned char>(v >> 16);
  out[3] = static_cast<unsigned char>(v >> 24);
}

std::uint32_t GetU32(const unsigned char* in) {
  return static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
         (static_cast<std::uint32_t>(in[2]) << 16) |
         (static_cast<std::uint32_t>(in[3]) << 24);
}

std::uint32_t CheckedU32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFULL) {
    throw FormatError(std::string(what) + " does not fit the 32-bit header field");
  }
  return static_cast<std::uint32_t>(v);
}

void ReadExactly(std::istream& in, unsigned char* dst, std::size_t n,
                 const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(std::string("truncated logit dump: ") + what);
  }
}

enum class ColumnKind { kString, kReal, kUnsigned, kStatus };

struct SchemaDef {
  TableSchema schema;
  std::string_view name;
  std::vector<std::string> columns;
  std::vector<ColumnKind> kinds;
};

const std::vector<SchemaDef>& Schemas() {
  using K = ColumnKind;
  static const std::vector<SchemaDef> schemas = {
      {TableSchema::kEstimate, "estimate",
       {"source", "n_steps", "t_hat", "beta_hat", "status", "iterations", "residual",
        "log_likelihood"},
       {K::kString, K::kUnsigned, K::kReal, K::kReal, K::kStatus, K::kUnsigned, K::kReal,
        K::kReal}},
      {TableSchema::kSweep, "sweep",
       {"gen_model", "est_model", "gen_temperature", "text_index", "t_hat", "beta_hat",
        "status", "log_likelihood"},
       {K::kString, K::kString, K::kReal, K::kUnsigned, K::kReal, K::kReal, K::kStatus,
        K::kReal}},
      {TableSchema::kCrossGrid, "crossgrid",
       {"generator", "estimator", "n_rows", "n_saturated", "mae_all", "mae_converged",
        "r2", "pearson"},
       {K::kString, K::kString, K::kUnsigned, K::kUnsigned, K::kReal, K::kReal, K::kReal,
        K::kReal}},
      {TableSchema::kCrossGridPerT, "crossgrid-per-temperature",
       {"generator", "estimator", "gen_temperature", "n_rows", "n_saturated", "mae_all",
        "mae_converged", "mean_t_hat"},
       {K::kString, K::kString, K::kReal, K::kUnsigned, K::kUnsigned, K::kReal, K::kReal,
        K::kReal}},
      {TableSchema::kCorpusSummary, "corpus-summary",
       {"corpus_id", "n_texts", "n_saturated", "mean_t", "std_t"},
       {K::kString, K::kUnsigned, K::kUnsigned, K::kReal, K::kReal}},
      {TableSchema::kSweepPlot, "sweep-plot", {"series", "x", "y"},
       {K::kString, K::kReal, K::kReal}},
      {TableSchema::kHeatmap, "heatmap", {"row", "column", "value"},
       {K::kString, K::kString, K::kReal}},
  };
  return schemas;
}

const SchemaDef& Def(TableSchema schema) {
  for (const SchemaDef& d : Schemas()) {
    if (d.schema == schema) return d;
  }
  throw std::logic_error("unregistered schema");
}

std::vector<std::string> Split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void CheckField(const std::string& field) {
  if (field.find_first_of(",\n\r") != std::string::npos) {
    throw FormatError("table field contains a separator: '" + field + "'");
  }
}

void ValidateRow(const SchemaDef& def, const std::vector<std::string>& row,
                 std::size_t line_no) {
  const std::string where = " on line " + std::to_string(line_no);
  if (row.size() != def.columns.size()) {
    throw FormatError("row has " + std::to_string(row.size()) + " fields, expected " +
                      std::to_string(def.columns.size()) + where);
  }
  for (std::size_t c = 0; c < row.size(); ++c) {
    try {
      switch (def.kinds[c]) {
        case ColumnKind::kString:
          if (row[c].empty()) throw FormatError("empty field");
          break;
        case ColumnKind::kReal:
          ParseReal(row[c]);
          break;
        case ColumnKind::kUnsigned:
          ParseUnsigned(row[c]);
          break;
        case ColumnKind::kStatus:
          ParseStatus(row[c]);
          break;
      }
    } catch (const std::exception& e) {
      throw FormatError("bad value '" + row[c] + "' in column " + def.columns[c] + where +
                        ": " + e.what());
    }
  }
}

std::ofstream OpenOut(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream OpenIn(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

void WriteLogitDump(const LogitSequence& logits, const TokenSequence& tokens,
                    std::ostream& out) {
  CheckAligned(logits, tokens);
  std::array<unsigned char, kHeaderBytes> header{};
  std::memcpy(header.data(), kLogitDumpMagic, 4);
  PutU32(kLogitDumpVersion, header.data() + 4);
  PutU32(CheckedU32(logits.size(), "n_steps"), header.data() + 8);
  PutU32(CheckedU32(logits.vocab(), "vocab"), header.data() + 12);
  PutU32(kDtypeFloat32, header.data() + 16);

  std::vector<unsigned char> payload(4 * (logits.values().size() + tokens.size()));
  unsigned char* p = payload.data();
  for (double u : logits.values()) {
    const auto f = static_cast<float>(u);
    if (!std::isfinite(f)) {
      throw FormatError("logit value overflows 32-bit float storage");
    }
    PutU32(std::bit_cast<std::uint32_t>(f), p);
    p += 4;
  }
  for (TokenId t : tokens.tokens()) {
    PutU32(t, p);
    p += 4;
  }
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("failed writing logit dump");
}

void WriteLogitDump(const LogitSequence& logits, const TokenSequence& tokens,
                    const std::filesystem::path& path) {
  std::ofstream out = OpenOut(path, std::ios::binary | std::ios::trunc);
  WriteLogitDump(logits, tokens, out);
}

LogitDump ReadLogitDump(std::istream& in) {
  std::array<unsigned char, kHeaderBytes> header{};
  ReadExactly(in, header.data(), header.size(), "header");
  if (std::memcmp(header.data(), kLogitDumpMagic, 4) != 0) {
    throw FormatError("bad magic: not a TLOG logit dump");
  }
  const std::uint32_t version = GetU32(header.data() + 4);
  if (version != kLogitDumpVersion) {
    throw FormatError("unsupported TLOG version " + std::to_string(version));
  }
  const std::uint32_t n_steps = GetU32(header.data() + 8);
  const std::uint32_t vocab = GetU32(header.data() + 12);
  const std::uint32_t dtype = GetU32(header.data() + 16);
  if (dtype != kDtypeFloat32) {
    throw FormatError("unsupported dtype code " + std::to_string(dtype));
  }
  if (n_steps == 0) throw FormatError("logit dump has no steps");
  if (vocab == 0) throw FormatError("logit dump has zero vocab");

  const std::uint64_t total = std::uint64_t{n_steps} * vocab;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(total, kChunkValues)));
  std::vector<unsigned char> buf;
  for (std::uint64_t done = 0; done < total;) {
    const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(total - done, kChunkValues));
    buf.resize(4 * n);
    ReadExactly(in, buf.data(), buf.size(), "logit payload");
    for (std::size_t k = 0; k < n; ++k) {
      const float f = std::bit_cast<float>(GetU32(buf.data() + 4 * k));
      if (!std::isfinite(f)) {
        throw FormatError("non-finite logit at step " +
                          std::to_string((done + k) / vocab) + ", token " +
                          std::to_string((done + k) % vocab));
      }
      values.push_back(f);
    }
    done += n;
  }

  buf.resize(4 * std::size_t{n_steps});
  ReadExactly(in, buf.data(), buf.size(), "token ids");
  std::vector<TokenId> tokens(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) {
    tokens[i] = GetU32(buf.data() + 4 * i);
    if (tokens[i] >= vocab) {
      throw FormatError("token id " + std::to_string(tokens[i]) + " at step " +
                        std::to_string(i) + " is outside vocab " + std::to_string(vocab));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after logit dump payload");
  }
  return {LogitSequence(vocab, std::move(values)), TokenSequence(vocab, std::move(tokens))};
}

LogitDump ReadLogitDump(const std::filesystem::path& path) {
  std::ifstream in = OpenIn(path, std::ios::binary);
  try {
    return ReadLogitDump(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

const std::vector<std::string>& SchemaColumns(TableSchema schema) {
  return Def(schema).columns;
}

std::string_view SchemaName(TableSchema schema) { return Def(schema).name; }

TableSchema DetectSchema(const std::vector<std::string>& header) {
  for (const SchemaDef& d : Schemas()) {
    if (d.columns == header) return d.schema;
  }
  std::string joined;
  for (const std::string& h : header) joined += (joined.empty() ? "" : ",") + h;
  throw FormatError("unknown table header: " + joined);
}

ResultTable::ResultTable(TableSchema schema) : header(SchemaColumns(schema)) {}

std::size_t ResultTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("table has no column " + std::string(name));
  return static_cast<std::size_t>(it - header.begin());
}

std::string FormatReal(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double ParseReal(std::string_view field) {
  double value = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw FormatError("not a real number: '" + std::string(field) + "'");
  }
  return value;
}

std::uint64_t ParseUnsigned(std::string_view field) {
  std::uint64_t value = 0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw FormatError("not an unsigned integer: '" + std::string(field) + "'");
  }
  return value;
}

void WriteResults(const ResultTable& table, std::ostream& out) {
  const SchemaDef& def = Def(table.schema());
  std::string text;
  for (const std::string& c : table.comments) {
    if (c.find_first_of("\n\r") != std::string::npos) {
      throw FormatError("comment spans lines");
    }
    text += "# " + c + "\n";
  }
  std::size_t line_no = table.comments.size() + 1;
  auto append_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      CheckField(row[c]);
      if (c) text += ',';
      text += row[c];
    }
    text += '\n';
  };
  append_row(table.header);
  for (const auto& row : table.rows) {
    ValidateRow(def, row, ++line_no);
    append_row(row);
  }
  out << text;
  if (!out) throw std::runtime_error("failed writing result table");
}

void WriteResults(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream out = OpenOut(path, std::ios::trunc);
  WriteResults(table, out);
}

ResultTable ReadResults(std::istream& in) {
  ResultTable table;
  table.header.clear();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  const SchemaDef* def = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    if (!have_header) {
      if (line.rfind("# ", 0) == 0) {
        table.comments.push_back(line.substr(2));
        continue;
      }
      table.header = Split(line);
      def = &Def(DetectSchema(table.header));
      have_header = true;
      continue;
    }
    if (line.empty()) throw FormatError("empty row on line " + std::to_string(line_no));
    std::vector<std::string> row = Split(line);
    ValidateRow(*def, row, line_no);
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw FormatError("result table has no header");
  return table;
}

ResultTable ReadResults(const std::filesystem::path& path) {
  std::ifstream in = OpenIn(path, std::ios::in);
  try {
    return ReadResults(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

ResultTable EstimatesToTable(const std::vector<std::string>& sources,
                             const std::vector<std::size_t>& n_steps,
                             const std::vector<TemperatureEstimate>& estimates) {
  if (sources.size() != estimates.size() || n_steps.size() != estimates.size()) {
    throw std::invalid_argument("estimate record columns differ in length");
  }
  ResultTable table(TableSchema::kEstimate);
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const TemperatureEstimate& e = estimates[i];
    table.rows.push_back({sources[i], std::to_string(n_steps[i]), FormatReal(e.t_hat),
                          FormatReal(e.beta_hat), std::string(StatusName(e.status)),
                          std::to_string(e.iterations), FormatReal(e.residual_at_root),
                          FormatReal(e.log_likelihood_at_root)});
  }
  return table;
}

ResultTable SweepToTable(const SweepResult& sweep) {
  ResultTable table(TableSchema::kSweep);
  for (const SweepRow& r : sweep.rows) {
    table.rows.push_back({r.gen_model_id, r.est_model_id, FormatReal(r.gen_temperature),
                          std::to_string(r.text_index), FormatReal(r.estimate.t_hat),
                          FormatReal(r.estimate.beta_hat),
                          std::string(StatusName(r.estimate.status)),
                          FormatReal(r.estimate.log_likelihood_at_root)});
  }
  return table;
}

SweepResult SweepFromTable(const ResultTable& table) {
  if (table.schema() != TableSchema::kSweep) {
    throw FormatError("expected a sweep table");
  }
  SweepResult sweep;
  for (const auto& f : table.rows) {
    SweepRow r;
    r.gen_model_id = f[0];
    r.est_model_id = f[1];
    r.gen_temperature = ParseReal(f[2]);
    r.text_index = ParseUnsigned(f[3]);
    r.estimate.t_hat = ParseReal(f[4]);
    r.estimate.beta_hat = ParseReal(f[5]);
    r.estimate.status = ParseStatus(f[6]);
    r.estimate.log_likelihood_at_root = ParseReal(f[7]);
    sweep.rows.push_back(std::move(r));
  }
  return sweep;
}

ResultTable CrossGridToTable(const CrossGridResult& grid) {
  ResultTable table(TableSchema::kCrossGrid);
  table.comments.push_back(
      "mae_all pools every (temperature, text) row with saturated estimates at "
      "their clamped values; mae_converged, r2 and pearson use converged rows only");
  for (const PairMetrics& m : grid.cells) {
    const SweepSummary& s = m.summary;
    table.rows.push_back({m.generator, m.estimator, std::to_string(s.n_rows),
                          std::to_string(s.n_saturated), FormatReal(s.mae_all),
                          FormatReal(s.mae_converged), FormatReal(s.r2),
                          FormatReal(s.pearson)});
  }
  return table;
}

ResultTable CrossGridPerTemperatureToTable(const CrossGridResult& grid) {
  ResultTable table(TableSchema::kCrossGridPerT);
  for (const PerTemperatureMetrics& m : grid.per_temperature) {
    table.rows.push_back({m.generator, m.estimator, FormatReal(m.gen_temperature),
                          std::to_string(m.n_rows), std::to_string(m.n_saturated),
                          FormatReal(m.mae_all), FormatReal(m.mae_converged),
                          FormatReal(m.mean_t_hat)});
  }
  return table;
}

ResultTable CorpusStatsToTable(const CorpusStats& stats) {
  ResultTable table(TableSchema::kCorpusSummary);
  table.comments.push_back(
      "mean_t and std_t over converged estimates; std_t is the population "
      "standard deviation (divide by n); n_saturated counts saturated and "
      "degenerate texts");
  table.rows.push_back({stats.corpus_id, std::to_string(stats.n_texts),
                        std::to_string(stats.n_saturated), FormatReal(stats.mean_t),
                        FormatReal(stats.std_t)});
  return table;
}

namespace {

using nlohmann::json;

void RejectUnknownKeys(const json& obj, std::initializer_list<std::string_view> known,
                       const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw FormatError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T Get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError("bad '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

std::uint64_t GetCount(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    throw FormatError("'" + std::string(key) + "' in " + where +
                      " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

ExperimentSpec ParseExperimentSpec(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw FormatError("experiment spec must be a JSON object");
  RejectUnknownKeys(root, {"seed", "grid", "texts", "tokens", "models"}, "experiment spec");

  ExperimentSpec spec;
  if (root.contains("seed")) spec.seed = GetCount(root, "seed", "experiment spec");
  if (root.contains("texts")) spec.texts = GetCount(root, "texts", "experiment spec");
  if (root.contains("tokens")) spec.tokens = GetCount(root, "tokens", "experiment spec");
  if (root.contains("grid")) {
    const json& g = root.at("grid");
    if (!g.is_object()) throw FormatError("'grid' must be an object");
    RejectUnknownKeys(g, {"t_min", "t_max", "t_step"}, "grid");
    TemperatureGrid grid;
    if (g.contains("t_min")) grid.t_min = Get<double>(g, "t_min", "grid");
    if (g.contains("t_max")) grid.t_max = Get<double>(g, "t_max", "grid");
    if (g.contains("t_step")) grid.t_step = Get<double>(g, "t_step", "grid");
    try {
      grid.Validate();
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("invalid grid: ") + e.what());
    }
    spec.grid = grid;
  }

  if (!root.contains("models") || !root.at("models").is_array() ||
      root.at("models").empty()) {
    throw FormatError("experiment spec needs a non-empty 'models' array");
  }
  std::size_t index = 0;
  for (const json& m : root.at("models")) {
    const std::string where = "models[" + std::to_string(index++) + "]";
    if (!m.is_object()) throw FormatError(where + " must be an object");
    RejectUnknownKeys(m, {"name", "vocab", "order", "logit_scale", "seed"}, where);
    if (!m.contains("seed")) throw FormatError(where + " needs an explicit 'seed'");
    SyntheticModelSpec s;
    s.seed = GetCount(m, "seed", where);
    if (m.contains("name")) s.name = Get<std::string>(m, "name", where);
    if (m.contains("vocab")) s.vocab = GetCount(m, "vocab", where);
    if (m.contains("order")) s.order = GetCount(m, "order", where);
    if (m.contains("logit_scale")) s.logit_scale = Get<double>(m, "logit_scale", where);
    try {
      s.Validate();
    } catch (const std::invalid_argument& e) {
      throw FormatError(where + ": " + e.what());
    }
    spec.models.push_back(std::move(s));
  }
  return spec;
}

ExperimentSpec ReadExperimentSpec(const std::filesystem::path& path) {
  std::ifstream in = OpenIn(path, std::ios::in);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return ParseExperimentSpec(text.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace textemp
