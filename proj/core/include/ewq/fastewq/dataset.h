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

#ifndef EWQ_FASTEWQ_DATASET_H_
#define EWQ_FASTEWQ_DATASET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ewq::fastewq {

enum class QuantType { kRaw, k8Bit, k4Bit };

std::string_view QuantTypeName(QuantType t);  // "raw", "8-bit", "4-bit"
QuantType ParseQuantType(std::string_view name);

// Classifier inputs, in this order.
using Features = std::array<double, 3>;
inline constexpr std::array<std::string_view, 3> kFeatureNames = {
    "num_parameters", "exec_index", "num_blocks"};

inline Features MakeFeatures(std::uint64_t num_parameters, std::uint64_t exec_index,
                             std::uint64_t num_blocks) {
  return {static_cast<double>(num_parameters), static_cast<double>(exec_index),
          static_cast<double>(num_blocks)};
}

// One row of the block dataset. quantized = 0 iff quantization_type is raw.
struct BlockRecord {
  std::string model_name;
  std::uint64_t num_blocks = 0;
  std::uint64_t exec_index = 0;
  std::uint64_t num_parameters = 0;
  QuantType quantization_type = QuantType::kRaw;
  int quantized = 0;

  Features features() const { return MakeFeatures(num_parameters, exec_index, num_blocks); }
  bool operator==(const BlockRecord&) const = default;
};

inline constexpr std::array<std::string_view, 6> kDatasetColumns = {
    "model_name", "num_blocks", "exec_index", "num_parameters", "quantization_type",
    "quantized"};

// Comma-delimited text with a header row naming the six columns (any order,
// extra columns ignored). Throws kMissingColumn, kParse, kInconsistentLabel.
std::vector<BlockRecord> ParseDataset(std::istream& in);
std::vector<BlockRecord> LoadDataset(const std::filesystem::path& path);

void WriteDataset(std::ostream& out, std::span<const BlockRecord> records);
void SaveDataset(const std::filesystem::path& path, std::span<const BlockRecord> records);

}  // namespace ewq::fastewq

#endif  // EWQ_FASTEWQ_DATASET_H_
