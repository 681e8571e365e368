/*
 * Copyright 2026 The EWQ Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ewq/fastewq/dataset.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "ewq/error.h"

namespace ewq::fastewq {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one line; double quotes group commas and "" escapes a quote.
std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(Trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(Trim(cur));
  return fields;
}

std::uint64_t ParseUnsigned(std::string_view text, std::string_view column, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " +
                                       std::string(column) + " '" + std::string(text) +
                                       "' is not a non-negative integer");
  }
  return v;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view QuantTypeName(QuantType t) {
  switch (t) {
    case QuantType::kRaw: return "raw";
    case QuantType::k8Bit: return "8-bit";
    case QuantType::k4Bit: return "4-bit";
  }
  return "?";
}

QuantType ParseQuantType(std::string_view name) {
  if (name == "raw") return QuantType::kRaw;
  if (name == "8-bit" || name == "8bit" || name == "q8") return QuantType::k8Bit;
  if (name == "4-bit" || name == "4bit" || name == "q4") return QuantType::k4Bit;
  throw Error(ErrorCode::kParse, "unknown quantization_type '" + std::string(name) + "'");
}

std::vector<BlockRecord> ParseDataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMissingColumn, "dataset has no header row");
  }
  const auto header = SplitCsvLine(line);
  std::map<std::string_view, std::size_t> index;
  for (std::string_view col : kDatasetColumns) {
    auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end()) {
      throw Error(ErrorCode::kMissingColumn, "dataset lacks column '" + std::string(col) + "'");
    }
    index[col] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<BlockRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() < header.size()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + " has " +
                                         std::to_string(f.size()) + " fields, expected " +
                                         std::to_string(header.size()));
    }
    auto field = [&](std::string_view col) -> const std::string& { return f[index[col]]; };
    BlockRecord r;
    r.model_name = field("model_name");
    r.num_blocks = ParseUnsigned(field("num_blocks"), "num_blocks", line_no);
    r.exec_index = ParseUnsigned(field("exec_index"), "exec_index", line_no);
    r.num_parameters = ParseUnsigned(field("num_parameters"), "num_parameters", line_no);
    r.quantization_type = ParseQuantType(field("quantization_type"));
    const std::uint64_t q = ParseUnsigned(field("quantized"), "quantized", line_no);
    if (q > 1) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": quantized must be 0 or 1");
    }
    r.quantized = static_cast<int>(q);
    if ((r.quantized == 0) != (r.quantization_type == QuantType::kRaw)) {
      throw Error(ErrorCode::kInconsistentLabel,
                  "line " + std::to_string(line_no) + ": quantization_type '" +
                      std::string(QuantTypeName(r.quantization_type)) +
                      "' disagrees with quantized=" + std::to_string(r.quantized));
    }
    if (r.exec_index < 2) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": transformer exec_index must be >= 2");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<BlockRecord> LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return ParseDataset(in);
}

void WriteDataset(std::ostream& out, std::span<const BlockRecord> records) {
  for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
    out << (i ? "," : "") << kDatasetColumns[i];
  }
  out << '\n';
  for (const auto& r : records) {
    out << CsvField(r.model_name) << ',' << r.num_blocks << ',' << r.exec_index << ','
        << r.num_parameters << ',' << QuantTypeName(r.quantization_type) << ','
        << r.quantized << '\n';
  }
}

void SaveDataset(const std::filesystem::path& path, std::span<const BlockRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create '" + path.string() + "'");
  WriteDataset(out, records);
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace ewq::fastewq
