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

#ifndef EWQ_TESTS_SUPPORT_FIXTURES_H_
#define EWQ_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ewq/entropy.h"
#include "ewq/fastewq/dataset.h"
#include "ewq/planner.h"
#include "ewq/tensor_io.h"

namespace ewq::fixtures {

inline constexpr std::uint64_t kGiB = std::uint64_t{1} << 30;

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);

// 200 transformer-block rows from six architectures; a block is labelled
// quantized iff exec_index > num_blocks / 2.
std::vector<fastewq::BlockRecord> SeparableDataset();

// Rows whose label depends on exec_index alone (exec_index > 16); the other
// two features carry noise.
std::vector<fastewq::BlockRecord> ExecOnlyDataset(std::uint64_t seed);

// A checkpoint with an embedding, `layers` transformer layers (attention,
// mlp and a norm each) and an output head. Layer k draws its weights with
// standard deviation (k + 1) * spread.
void WriteToyModel(const std::filesystem::path& path, int layers, std::uint64_t seed,
                   DType dtype = DType::kF32, double spread = 0.5);

BlockEntropyReport Report(std::uint32_t exec_index, double entropy,
                          std::uint64_t num_parameters);

// Single-machine cluster of `bytes` capacity.
std::vector<MachineSpec> Cluster(std::uint64_t bytes);

// Parameter count whose raw (16-bit) size is exactly `bytes`.
inline std::uint64_t ParamsForRawBytes(std::uint64_t bytes) { return bytes / 2; }

}  // namespace ewq::fixtures

#endif  // EWQ_TESTS_SUPPORT_FIXTURES_H_
